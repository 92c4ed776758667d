#include "harvest/kernels.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include "harvest/errors.hpp"
#include "harvest/smearing.hpp"

namespace harvest {

namespace {

// ∫_0^∞ e^{-πv²/(4T²)} e^{-iωv} dv in closed form.
cplx v_integral_closed(double omega, double T) {
  double re = T * std::exp(-omega * omega * T * T / M_PI);
  double im = -(2.0 * T / std::sqrt(M_PI)) * dawson(omega * T / std::sqrt(M_PI));
  return {re, im};
}

QuadResult<cplx> v_integral_quad(double omega, double T, const QuadratureSettings& q) {
  const double a = M_PI / (4.0 * T * T);
  VectorQuadSpec s;
  s.initial_panels = 4 + static_cast<int>(std::ceil(std::abs(omega) * 8.0 * T / M_PI));
  auto r = integrate_vector(
      [&](double v, cplx* o) { o[0] = std::exp(-a * v * v) * std::polar(1.0, -omega * v); }, 0.0, 8.0 * T,
      s, q);
  return {r.value[0], r.error[0], r.evaluations, r.converged};
}

bool self_check() {
  QuadratureSettings q;
  q.rel_tol = 1e-13;
  q.abs_tol = 1e-15;
  const double Ts[] = {0.3, 1.0, 2.5};
  const double ws[] = {0.0, 0.05, 0.3, 0.9, 1.7, 3.0, 6.0, 12.0, 40.0};
  for (double T : Ts)
    for (double w : ws) {
      auto qv = v_integral_quad(w, T, q);
      cplx cv = v_integral_closed(w, T);
      if (!qv.converged || std::abs(qv.value - cv) > 1e-10 * T) return false;
    }
  return true;
}

}  // namespace

void validate(const TargetFieldSpec& f) {
  if (!(f.mass >= 0) || !std::isfinite(f.mass)) fail(Status::InvalidArgument, "target mass must be >= 0");
}

double omega_k(double k, const TargetFieldSpec& f) {
  validate(f);
  if (!(k >= 0)) fail(Status::Domain, "omega_k: k must be >= 0");
  if (k == 0.0 && f.mass == 0.0)
    fail(Status::IntegrableSingularity, "omega_k: massless field evaluated at k = 0");
  return std::sqrt(k * k + f.mass * f.mass);
}

double local_time_kernel(double Omega, double omega, const SwitchingSpec& s) {
  return switching_fourier_sq(s, Omega + omega);
}

double dawson(double x) {
  double ax = std::abs(x);
  if (ax < 0.2) {
    // Σ (-1)^n 2^n x^{2n+1} / (2n+1)!!
    double x2 = x * x, term = x, sum = x;
    for (int n = 1; n < 20; ++n) {
      term *= -2.0 * x2 / (2.0 * n + 1.0);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  // Rybicki's sampling-theorem sum.
  constexpr double h = 0.2;
  constexpr int nmax = 18;
  static const auto coef = [] {
    std::array<double, nmax> c{};
    for (int i = 0; i < nmax; ++i) c[i] = std::exp(-((2 * i + 1) * h) * ((2 * i + 1) * h));
    return c;
  }();
  double n0 = 2.0 * std::nearbyint(0.5 * ax / h);
  double xp = ax - n0 * h;
  double e1 = std::exp(2.0 * xp * h), e2 = e1 * e1;
  double d1 = n0 + 1.0, d2 = d1 - 2.0, sum = 0.0;
  for (int i = 0; i < nmax; ++i) {
    sum += coef[i] * (e1 / d1 + 1.0 / (d2 * e1));
    d1 += 2.0;
    d2 -= 2.0;
    e1 *= e2;
  }
  return std::copysign(std::exp(-xp * xp) * sum / std::sqrt(M_PI), x);
}

bool closed_form_kernel_verified() {
  static std::once_flag once;
  static bool ok = false;
  std::call_once(once, [] { ok = self_check(); });
  return ok;
}

QuadResult<cplx> feynman_time_kernel_quadrature(double Omega, double omega, const SwitchingSpec& s,
                                                const QuadratureSettings& q) {
  validate(s);
  auto v = v_integral_quad(omega, s.T, q);
  cplx pre = 2.0 * s.T * std::exp(-Omega * Omega * s.T * s.T / M_PI) *
             std::polar(1.0, 2.0 * Omega * s.center_time);
  if (!v.converged)
    fail(Status::ToleranceNotMet, "feynman_time_kernel: v-quadrature did not converge", std::abs(pre) * v.error);
  return {pre * v.value, std::abs(pre) * v.error, v.evaluations, true};
}

cplx feynman_time_kernel(double Omega, double omega, const SwitchingSpec& s, const QuadratureSettings& q) {
  if (q.closed_form_kernel && closed_form_kernel_verified()) {
    validate(s);
    return 2.0 * s.T * std::exp(-Omega * Omega * s.T * s.T / M_PI) *
           std::polar(1.0, 2.0 * Omega * s.center_time) * v_integral_closed(omega, s.T);
  }
  return feynman_time_kernel_quadrature(Omega, omega, s, q).value;
}

cplx symmetric_time_kernel(double Omega, double omega, const SwitchingSpec& s) {
  validate(s);
  return 2.0 * s.T * std::exp(-Omega * Omega * s.T * s.T / M_PI) * s.T *
         std::exp(-omega * omega * s.T * s.T / M_PI) * std::polar(1.0, 2.0 * Omega * s.center_time);
}

}  // namespace harvest
