#include "harvest/smearing.hpp"

#include <algorithm>
#include <cmath>

#include "harvest/errors.hpp"
#include "harvest/modes.hpp"

namespace harvest {

namespace {

// sin(y)/y with a 6th-order Taylor expansion near the removable singularity.
double sinc(double y) {
  if (std::abs(y) < 1e-4) {
    double y2 = y * y;
    return 1.0 - y2 / 6.0 + y2 * y2 / 120.0 - y2 * y2 * y2 / 5040.0;
  }
  return std::sin(y) / y;
}

// (e^{ix} - 1)/(ix)
cplx expm1_over(double x) { return std::polar(sinc(0.5 * x), 0.5 * x); }

}  // namespace

void validate(const SwitchingSpec& s) {
  if (!(s.T > 0) || !std::isfinite(s.T)) fail(Status::InvalidArgument, "switching.T must be positive");
  if (!std::isfinite(s.center_time)) fail(Status::InvalidArgument, "switching.center_time must be finite");
}

void validate(const DetectorSpec& d) {
  validate(d.potential);
  validate_mode(d.mode, d.potential);
  validate(d.switching);
  if (!(d.lambda > 0) || !std::isfinite(d.lambda)) fail(Status::InvalidArgument, "lambda must be positive");
  if (d.gap && (!(*d.gap > 0) || !std::isfinite(*d.gap)))
    fail(Status::InvalidArgument, "gap override must be positive");
}

double detector_gap(const DetectorSpec& d) {
  return d.gap ? *d.gap : mode_frequency(d.mode, d.potential);
}

double switching_value(const SwitchingSpec& s, double t) {
  validate(s);
  double u = (t - s.center_time) / s.T;
  return std::exp(-0.5 * M_PI * u * u);
}

double switching_fourier_sq(const SwitchingSpec& s, double omega) {
  validate(s);
  return 2.0 * s.T * s.T * std::exp(-omega * omega * s.T * s.T / M_PI);
}

cplx box_axis_fourier(int n, double d, double q) {
  double a = M_PI * n / d;
  cplx bracket = expm1_over((a - q) * d) - expm1_over(-(a + q) * d);
  return std::sqrt(2.0 / d) * d * bracket / cplx(0.0, 2.0);
}

cplx harmonic_axis_fourier(int n, double ell, double q) {
  static const cplx mi[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return std::sqrt(2.0 * M_PI * ell) * hermite_function(n, q * ell) * mi[n % 4];
}

cplx spatial_fourier_local(const DetectorSpec& d, const Vec3& k) {
  validate(d);
  cplx v = 1.0 / std::sqrt(2.0 * detector_gap(d));
  const auto& p = d.potential;
  for (int i = 0; i < 3; ++i)
    v *= p.kind == PotentialKind::Box ? box_axis_fourier(d.mode[i], p.scale, k[i])
                                      : harmonic_axis_fourier(d.mode[i], p.scale, k[i]);
  return v;
}

cplx spatial_fourier(const DetectorSpec& d, const Vec3& k) {
  const auto& c = d.potential.center;
  double ph = k[0] * c[0] + k[1] * c[1] + k[2] * c[2];
  return spatial_fourier_local(d, k) * std::polar(1.0, -ph);
}

bool radially_symmetric(const DetectorSpec& d) {
  return d.potential.kind == PotentialKind::Harmonic && d.mode == ModeIndex{0, 0, 0};
}

double radial_fourier(const DetectorSpec& d, double k) {
  if (!radially_symmetric(d)) fail(Status::UnsupportedMode, "radial_fourier needs a harmonic ground mode");
  double l = d.potential.scale;
  return std::pow(4.0 * M_PI * l * l, 0.75) * std::exp(-0.5 * k * k * l * l) /
         std::sqrt(2.0 * detector_gap(d));
}

double fourier_cutoff(const DetectorSpec& d) {
  const auto& p = d.potential;
  if (p.kind == PotentialKind::Box) return 80.0 / p.scale;
  int nmax = std::max({d.mode[0], d.mode[1], d.mode[2]});
  return (std::sqrt(2.0 * nmax + 1.0) + 8.6) / p.scale;
}

}  // namespace harvest
