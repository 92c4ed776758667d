#include "harvest/modes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "harvest/errors.hpp"

namespace harvest {

void validate(const PotentialSpec& p) {
  if (!(p.scale > 0) || !std::isfinite(p.scale))
    fail(Status::InvalidArgument, "potential.scale must be positive");
  if (!(p.probe_mass >= 0) || !std::isfinite(p.probe_mass))
    fail(Status::InvalidArgument, "potential.probe_mass must be non-negative");
  for (double c : p.center)
    if (!std::isfinite(c)) fail(Status::InvalidArgument, "potential.center must be finite");
}

void validate_mode(const ModeIndex& n, const PotentialSpec& p) {
  for (int ni : n) {
    if (p.kind == PotentialKind::Box && ni < 1)
      fail(Status::InvalidIndex, "box mode indices must be >= 1");
    if (p.kind == PotentialKind::Harmonic && ni < 0)
      fail(Status::InvalidIndex, "harmonic mode indices must be >= 0");
    if (p.kind == PotentialKind::Harmonic && ni > kHermiteMaxOrder)
      fail(Status::UnsupportedOrder, "harmonic mode index above " + std::to_string(kHermiteMaxOrder));
  }
}

double hermite_eval(int m, double u) {
  if (m < 0) fail(Status::InvalidIndex, "hermite order must be >= 0");
  if (m > kHermiteMaxOrder)
    fail(Status::UnsupportedOrder, "hermite order above " + std::to_string(kHermiteMaxOrder));
  double h0 = 1.0;
  if (m == 0) return h0;
  double h1 = 2.0 * u;
  for (int k = 1; k < m; ++k) {
    double h2 = 2.0 * u * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double hermite_function(int m, double y) {
  if (m < 0) fail(Status::InvalidIndex, "hermite order must be >= 0");
  if (m > kHermiteMaxOrder)
    fail(Status::UnsupportedOrder, "hermite order above " + std::to_string(kHermiteMaxOrder));
  double p0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * y * y);
  if (m == 0) return p0;
  double p1 = std::sqrt(2.0) * y * p0;
  for (int k = 1; k < m; ++k) {
    double p2 = std::sqrt(2.0 / (k + 1)) * y * p1 - std::sqrt(double(k) / (k + 1)) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double harmonic_frequency(const ModeIndex& n, const PotentialSpec& p) {
  if (p.kind != PotentialKind::Harmonic)
    fail(Status::KindMismatch, "harmonic_frequency needs a harmonic potential");
  validate(p);
  validate_mode(n, p);
  double l2 = p.scale * p.scale;
  return std::sqrt(p.probe_mass * p.probe_mass + (2.0 / l2) * (n[0] + n[1] + n[2] + 1.5));
}

double box_frequency(const ModeIndex& n, const PotentialSpec& p) {
  if (p.kind != PotentialKind::Box) fail(Status::KindMismatch, "box_frequency needs a box potential");
  validate(p);
  validate_mode(n, p);
  double d2 = p.scale * p.scale;
  double s = double(n[0]) * n[0] + double(n[1]) * n[1] + double(n[2]) * n[2];
  return std::sqrt(p.probe_mass * p.probe_mass + M_PI * M_PI * s / d2);
}

double mode_frequency(const ModeIndex& n, const PotentialSpec& p) {
  return p.kind == PotentialKind::Harmonic ? harmonic_frequency(n, p) : box_frequency(n, p);
}

double axis_profile(int n, const PotentialSpec& p, double u) {
  if (p.kind == PotentialKind::Harmonic) return hermite_function(n, u / p.scale) / std::sqrt(p.scale);
  double d = p.scale;
  if (u < 0.0 || u > d) return 0.0;
  return std::sqrt(2.0 / d) * std::sin(M_PI * n * u / d);
}

double mode_spatial_profile(const ModeIndex& n, const PotentialSpec& p, const Vec3& x,
                            std::optional<double> gap) {
  validate(p);
  validate_mode(n, p);
  double w = gap ? *gap : mode_frequency(n, p);
  if (!(w > 0)) fail(Status::InvalidArgument, "gap must be positive");
  double v = 1.0 / std::sqrt(2.0 * w);
  for (int i = 0; i < 3; ++i) v *= axis_profile(n[i], p, x[i] - p.center[i]);
  return v;
}

namespace {

// Interval outside which the unit-normalized axis factor is negligible
// (|f| below ~1e-20) or exactly zero.
std::pair<double, double> axis_support(int n, const PotentialSpec& p, int axis) {
  double c = p.center[axis];
  if (p.kind == PotentialKind::Box) return {c, c + p.scale};
  double r = (std::sqrt(2.0 * n + 1.0) + 10.0) * p.scale;
  return {c - r, c + r};
}

}  // namespace

OverlapResult mode_overlap(const ModeIndex& nA, const PotentialSpec& pA, const ModeIndex& nB,
                           const PotentialSpec& pB) {
  validate(pA);
  validate(pB);
  validate_mode(nA, pA);
  validate_mode(nB, pB);

  bool gauss = pA.kind == PotentialKind::Harmonic && pB.kind == PotentialKind::Harmonic &&
               nA == ModeIndex{0, 0, 0} && nB == ModeIndex{0, 0, 0};
  if (gauss) {
    double la2 = pA.scale * pA.scale, lb2 = pB.scale * pB.scale;
    double v = 1.0;
    for (int i = 0; i < 3; ++i) {
      double dlt = pA.center[i] - pB.center[i];
      v *= std::sqrt(2.0 * pA.scale * pB.scale / (la2 + lb2)) * std::exp(-dlt * dlt / (2.0 * (la2 + lb2)));
    }
    return {v, 0.0};
  }

  QuadratureSettings q;
  q.rel_tol = 1e-13;
  q.abs_tol = 1e-12;
  double value = 1.0, err = 0.0;
  for (int i = 0; i < 3; ++i) {
    auto [a0, a1] = axis_support(nA[i], pA, i);
    auto [b0, b1] = axis_support(nB[i], pB, i);
    double lo = std::max(a0, b0), hi = std::min(a1, b1);
    if (!(hi > lo)) return {0.0, 0.0};
    auto f = [&](double x) {
      return axis_profile(nA[i], pA, x - pA.center[i]) * axis_profile(nB[i], pB, x - pB.center[i]);
    };
    VectorQuadSpec s;
    s.initial_panels = 8 + 2 * std::max({nA[i], nB[i], 0});
    auto r = integrate_vector([&](double x, cplx* o) { o[0] = f(x); }, lo, hi, s, q);
    if (!r.converged || r.error[0] > q.abs_tol)
      fail(Status::ToleranceNotMet, "mode_overlap: axis quadrature did not converge", r.error[0]);
    err = std::abs(value) * r.error[0] + std::abs(r.value[0].real()) * err;
    value *= r.value[0].real();
  }
  return {value, err};
}

}  // namespace harvest
