#pragma once

#include <array>
#include <complex>
#include <optional>

namespace harvest {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

enum class PotentialKind { Harmonic, Box };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::Harmonic;
  double scale = 1.0;       // ℓ (harmonic) or side d (box)
  double probe_mass = 0.0;  // m_d
  Vec3 center{0.0, 0.0, 0.0};
};

using ModeIndex = std::array<int, 3>;

struct SwitchingSpec {
  double T = 1.0;
  double center_time = 0.0;
};

struct DetectorSpec {
  PotentialSpec potential;
  ModeIndex mode{0, 0, 0};
  SwitchingSpec switching;
  double lambda = 1.0;
  // Overrides the mode eigenfrequency as detector gap; the profile
  // normalization (2Ω)^{-1/2} follows the gap actually used.
  std::optional<double> gap;
};

enum class TargetState { MinkowskiVacuum };

struct TargetFieldSpec {
  double mass = 0.0;
  TargetState state = TargetState::MinkowskiVacuum;
};

}  // namespace harvest
