#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "doctest.h"
#include "harvest/errors.hpp"
#include "harvest/kernels.hpp"
#include "harvest/smearing.hpp"

using namespace harvest;
using boost::math::quadrature::gauss_kronrod;

namespace {

// J by direct (t,t') quadrature, inner integral split at t' = t.
cplx brute_force_J(double Omega, double omega, double T, double tol = 1e-12) {
  const double lim = 9.0 * T;
  auto z = [&](double t) { return std::exp(-0.5 * M_PI * t * t / (T * T)); };
  auto part = [&](bool imag) {
    auto outer = [&](double t) {
      auto inner = [&](double tp) {
        cplx v = z(tp) * std::polar(1.0, Omega * (t + tp) - omega * std::abs(t - tp));
        return imag ? v.imag() : v.real();
      };
      double a = gauss_kronrod<double, 31>::integrate(inner, -lim, t, 12, tol);
      double b = gauss_kronrod<double, 31>::integrate(inner, t, lim, 12, tol);
      return z(t) * (a + b);
    };
    return gauss_kronrod<double, 31>::integrate(outer, -lim, lim, 12, tol);
  };
  return {part(false), part(true)};
}

double dawson_quad(double x) {
  double v = gauss_kronrod<double, 61>::integrate([](double t) { return std::exp(t * t); }, 0.0, x, 15, 1e-15);
  return std::exp(-x * x) * v;
}

}  // namespace

TEST_CASE("omega_k") {
  CHECK(omega_k(0.0, {2.0}) == 2.0);
  CHECK(omega_k(3.0, {4.0}) == 5.0);
  CHECK(omega_k(1.25, {0.0}) == 1.25);
  try {
    omega_k(0.0, {0.0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::IntegrableSingularity);
  }
  CHECK_THROWS_AS(omega_k(-1.0, {1.0}), Error);
}

TEST_CASE("local time kernel") {
  SwitchingSpec s{1.0, 0.0};
  CHECK(local_time_kernel(0.0, 0.0, {2.0, 0.0}) == doctest::Approx(8.0));
  CHECK(local_time_kernel(1.0, 1.0, s) == doctest::Approx(2.0 * std::exp(-4.0 / M_PI)).epsilon(1e-15));
  for (double w : {0.0, 0.7, 4.0}) CHECK(local_time_kernel(1.3, w, s) == switching_fourier_sq(s, 1.3 + w));
  // Defining double integral without the time ordering: |∫ζ e^{-i(Ω+ω)t}|².
  auto re = [](double t) { return std::exp(-0.5 * M_PI * t * t) * std::cos(2.0 * t); };
  double v = gauss_kronrod<double, 61>::integrate(re, -10.0, 10.0, 15, 1e-15);
  CHECK(local_time_kernel(1.0, 1.0, s) == doctest::Approx(v * v).epsilon(1e-12));
  double prev = local_time_kernel(0.5, 0.0, s);
  for (double w = 0.25; w < 10; w += 0.25) {
    double c = local_time_kernel(0.5, w, s);
    CHECK(c < prev);
    prev = c;
  }
}

TEST_CASE("Dawson integral") {
  for (double x : {0.0, 1e-3, 0.15, 0.2, 0.5, 0.924, 1.7, 3.0, 6.5, 15.0}) {
    CHECK(dawson(x) == doctest::Approx(dawson_quad(x)).epsilon(1e-13));
    CHECK(dawson(-x) == -dawson(x));
  }
  CHECK(dawson(200.0) == doctest::Approx(1.0 / 400.0).epsilon(1e-5));
}

TEST_CASE("time-ordered kernel matches brute-force double integral") {
  QuadratureSettings q;
  cplx ref = brute_force_J(1.0, 2.0, 1.0);
  cplx got = feynman_time_kernel(1.0, 2.0, {1.0, 0.0}, q);
  CHECK(std::abs(got - ref) < 1e-8 * std::abs(ref));
  auto quad = feynman_time_kernel_quadrature(1.0, 2.0, {1.0, 0.0}, q);
  CHECK(std::abs(quad.value - ref) < 1e-8 * std::abs(ref));
}

TEST_CASE("real part agrees with the 2D grid over a 5x5 (Omega, omega) grid") {
  QuadratureSettings q;
  q.rel_tol = 1e-8;
  for (double Om : {0.5, 1.5, 3.0, 5.0, 8.0})
    for (double w : {0.1, 1.0, 2.5, 6.0, 12.0}) {
      cplx ref = brute_force_J(Om, w, 1.0, 1e-11);
      cplx got = feynman_time_kernel(Om, w, {1.0, 0.0}, q);
      CHECK(std::abs(got.real() - ref.real()) <= 1e-8 * std::abs(ref) + 1e-15);
    }
}

TEST_CASE("closed form and quadrature paths agree") {
  CHECK(closed_form_kernel_verified());
  QuadratureSettings closed, quad;
  quad.closed_form_kernel = false;
  quad.rel_tol = 1e-12;
  for (double T : {0.4, 1.0, 3.0})
    for (double Om : {0.0, 2.0, 7.5})
      for (double w : {0.0, 0.3, 5.0, 30.0}) {
        SwitchingSpec s{T, 0.25};
        cplx a = feynman_time_kernel(Om, w, s, closed);
        cplx b = feynman_time_kernel(Om, w, s, quad);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(b), 1e-300) + 1e-15);
      }
}

TEST_CASE("kernel bounds and limits") {
  QuadratureSettings q;
  for (double T : {0.2, 1.0, 2.0})
    for (double Om : {0.0, 1.0, 4.0})
      for (double w : {0.0, 0.5, 3.0, 20.0}) {
        cplx J = feynman_time_kernel(Om, w, {T, 0.0}, q);
        CHECK(std::isfinite(J.real()));
        CHECK(std::isfinite(J.imag()));
        CHECK(std::abs(J) <= 2 * T * T * (1 + 1e-14));
      }
  CHECK(std::abs(feynman_time_kernel(1.0, 2.0, {1e-6, 0.0}, q)) < 3e-12);
  CHECK(feynman_time_kernel(0.0, 0.0, {1.0, 0.0}, q).real() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("symmetrized kernel is the real part at zero centre time") {
  QuadratureSettings q;
  for (double Om : {0.5, 3.0})
    for (double w : {0.2, 2.0, 9.0}) {
      cplx J = feynman_time_kernel(Om, w, {1.3, 0.0}, q);
      cplx S = symmetric_time_kernel(Om, w, {1.3, 0.0});
      CHECK(S.real() == doctest::Approx(J.real()).epsilon(1e-13));
      CHECK(S.imag() == 0.0);
    }
}
