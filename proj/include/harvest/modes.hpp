#pragma once

#include "harvest/quadrature.hpp"
#include "harvest/types.hpp"

namespace harvest {

constexpr int kHermiteMaxOrder = 60;

void validate(const PotentialSpec& p);
void validate_mode(const ModeIndex& n, const PotentialSpec& p);

// Physicists' Hermite polynomial H_m(u), m <= 60.
double hermite_eval(int m, double u);

// Unit-normalized Hermite function ψ_m(y) = (2^m m! √π)^{-1/2} H_m(y) e^{-y²/2},
// by the normalized recurrence (no overflow for large m or |y|).
double hermite_function(int m, double y);

double harmonic_frequency(const ModeIndex& n, const PotentialSpec& p);
double box_frequency(const ModeIndex& n, const PotentialSpec& p);
double mode_frequency(const ModeIndex& n, const PotentialSpec& p);

// Unit-normalized 1D factor of the mode along one axis; u is measured from
// the trap center (harmonic) or from the box corner (box support [0,d]).
double axis_profile(int n, const PotentialSpec& p, double u);

// Φ_n(x) including the (2ω)^{-1/2} factor; ω is the mode frequency unless
// a gap override is given.
double mode_spatial_profile(const ModeIndex& n, const PotentialSpec& p, const Vec3& x,
                            std::optional<double> gap = std::nullopt);

struct OverlapResult {
  double value;
  double error;
};

OverlapResult mode_overlap(const ModeIndex& nA, const PotentialSpec& pA, const ModeIndex& nB,
                           const PotentialSpec& pB);

}  // namespace harvest
