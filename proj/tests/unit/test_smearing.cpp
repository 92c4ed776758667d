#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "doctest.h"
#include "harvest/errors.hpp"
#include "harvest/modes.hpp"
#include "harvest/smearing.hpp"

using namespace harvest;
using boost::math::quadrature::gauss_kronrod;

namespace {

DetectorSpec harmonic_detector(double ell, ModeIndex n = {0, 0, 0}, Vec3 c = {0, 0, 0}) {
  DetectorSpec d;
  d.potential = {PotentialKind::Harmonic, ell, 0.0, c};
  d.mode = n;
  return d;
}

DetectorSpec box_detector(double side, ModeIndex n = {1, 1, 1}, Vec3 c = {0, 0, 0}) {
  DetectorSpec d;
  d.potential = {PotentialKind::Box, side, 0.0, c};
  d.mode = n;
  return d;
}

// ∫ f(u) e^{-iqu} du by Boost Gauss-Kronrod, independent of the closed forms.
cplx axis_transform_quad(int n, const PotentialSpec& p, double q, double a, double b) {
  auto re = [&](double u) { return axis_profile(n, p, u) * std::cos(q * u); };
  auto im = [&](double u) { return -axis_profile(n, p, u) * std::sin(q * u); };
  return {gauss_kronrod<double, 61>::integrate(re, a, b, 20, 1e-13),
          gauss_kronrod<double, 61>::integrate(im, a, b, 20, 1e-13)};
}

}  // namespace

TEST_CASE("switching values") {
  SwitchingSpec s{1.0, 0.3};
  CHECK(switching_value(s, 0.3) == 1.0);
  CHECK(switching_value(s, 1.3) == doctest::Approx(std::exp(-M_PI / 2)).epsilon(1e-15));
  for (double t : {-2.0, 0.1, 0.9, 4.0}) CHECK(switching_value(s, t) == doctest::Approx(switching_value(s, 0.6 - t)));
  CHECK_THROWS_AS(switching_value({0.0, 0.0}, 0.0), Error);
}

TEST_CASE("switching_fourier_sq") {
  SwitchingSpec s{1.7, 0.0};
  CHECK(switching_fourier_sq(s, 0.0) == doctest::Approx(2 * 1.7 * 1.7).epsilon(1e-15));
  // Against the modulus squared of the numerically integrated transform.
  for (double w : {0.0, 0.8, 3.1}) {
    auto re = [&](double t) { return switching_value(s, t) * std::cos(w * t); };
    double v = gauss_kronrod<double, 61>::integrate(re, -20.0, 20.0, 15, 1e-14);
    CHECK(switching_fourier_sq(s, w) == doctest::Approx(v * v).epsilon(1e-12));
  }
  double prev = switching_fourier_sq({1.0, 0.0}, 0.0);
  for (double w = 0.5; w < 30; w += 0.5) {
    double v = switching_fourier_sq({1.0, 0.0}, w);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 1e-100);
  CHECK(switching_fourier_sq({1.0, 5.0}, 2.0) == switching_fourier_sq({1.0, -3.0}, 2.0));
}

TEST_CASE("spatial transform at k = 0") {
  auto g = harmonic_detector(0.3);
  double W = detector_gap(g);
  CHECK(spatial_fourier(g, {0, 0, 0}).real() ==
        doctest::Approx(std::pow(2 * W, -0.5) * std::pow(4 * M_PI * 0.09, 0.75)).epsilon(1e-13));
  auto b = box_detector(0.5, {1, 1, 1}, {-0.25, -0.25, -0.25});
  double w = detector_gap(b);
  cplx v = spatial_fourier(b, {0, 0, 0});
  CHECK(v.real() == doctest::Approx(std::pow(2 * w, -0.5) * std::pow(4.0, 1.5) * std::pow(1.0 / M_PI, 3)).epsilon(1e-13));
  CHECK(std::abs(v.imag()) < 1e-15);
}

TEST_CASE("axis transforms agree with direct quadrature") {
  for (int n = 0; n <= 4; ++n) {
    PotentialSpec p{PotentialKind::Harmonic, 0.7, 0.0, {0, 0, 0}};
    for (double q : {0.0, 0.9, 3.3, 7.0}) {
      cplx ref = axis_transform_quad(n, p, q, -12.0, 12.0);
      cplx got = harmonic_axis_fourier(n, 0.7, q);
      CHECK(std::abs(got - ref) < 1e-11);
    }
  }
  for (int n = 1; n <= 4; ++n) {
    PotentialSpec p{PotentialKind::Box, 1.3, 0.0, {0, 0, 0}};
    for (double q : {0.0, 1.1, 5.0, -8.2, 40.0}) {
      cplx ref = axis_transform_quad(n, p, q, 0.0, 1.3);
      CHECK(std::abs(box_axis_fourier(n, 1.3, q) - ref) < 1e-12);
    }
  }
}

TEST_CASE("box transform is continuous across the removable pole") {
  double d = 0.5;
  PotentialSpec p{PotentialKind::Box, d, 0.0, {0, 0, 0}};
  for (int n = 1; n <= 3; ++n)
    for (int sign : {-1, 1}) {
      double a = sign * n * M_PI / d;
      cplx at = box_axis_fourier(n, d, a);
      cplx ref = axis_transform_quad(n, p, a, 0.0, d);
      CHECK(std::abs(at - ref) < 1e-12 * std::abs(ref));
      double h = 1e-6 * M_PI / d;
      cplx lo = box_axis_fourier(n, d, a - h), hi = box_axis_fourier(n, d, a + h);
      CHECK(std::abs(lo - axis_transform_quad(n, p, a - h, 0.0, d)) < 1e-8 * std::abs(ref));
      CHECK(std::abs(hi - axis_transform_quad(n, p, a + h, 0.0, d)) < 1e-8 * std::abs(ref));
      CHECK(std::abs(0.5 * (lo + hi) - at) < 1e-8 * std::abs(at));
    }
}

TEST_CASE("Parseval: transform norm equals profile norm") {
  // 3D radial Gaussian: ∫|F|² d³k/(2π)³ = ∫Φ² d³x = 1/(2Ω).
  auto g = harmonic_detector(0.2);
  double W = detector_gap(g);
  auto f = [&](double k) { return 4 * M_PI * k * k * std::pow(radial_fourier(g, k), 2) / std::pow(2 * M_PI, 3); };
  double v = gauss_kronrod<double, 61>::integrate(f, 0.0, 200.0, 15, 1e-14);
  CHECK(v == doctest::Approx(1.0 / (2 * W)).epsilon(1e-10));

  // Per-axis factors, which makes the 3D identity hold for every product mode.
  for (int n = 0; n <= 3; ++n) {
    auto h = [&](double q) { return std::norm(harmonic_axis_fourier(n, 0.5, q)) / (2 * M_PI); };
    double s = 2 * gauss_kronrod<double, 61>::integrate(h, 0.0, 40.0, 15, 1e-14);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  }
  for (int n = 1; n <= 3; ++n) {
    double d = 0.9, a = n * M_PI / d, Q = 4000.0;
    auto h = [&](double q) { return std::norm(box_axis_fourier(n, d, q)) / (2 * M_PI); };
    double s = 0.0;
    for (double lo = 0.0; lo < Q; lo += 10.0) s += gauss_kronrod<double, 31>::integrate(h, lo, lo + 10.0, 10, 1e-15);
    s *= 2;
    // Tail: |f̃|² averages to (2/d)·2a²/q⁴ beyond Q.
    s += 2 * (2 / d) * 2 * a * a / (3 * Q * Q * Q) / (2 * M_PI);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("translation changes only the phase") {
  auto b0 = box_detector(0.8, {2, 1, 1});
  auto b1 = box_detector(0.8, {2, 1, 1}, {3.0, -1.0, 0.4});
  auto g0 = harmonic_detector(0.4, {1, 0, 2});
  auto g1 = harmonic_detector(0.4, {1, 0, 2}, {-2.0, 7.0, 1.0});
  for (Vec3 k : {Vec3{0.3, -1.0, 2.0}, Vec3{5.0, 0.1, -3.0}}) {
    CHECK(std::abs(spatial_fourier(b0, k)) == doctest::Approx(std::abs(spatial_fourier(b1, k))).epsilon(1e-13));
    CHECK(std::abs(spatial_fourier(g0, k)) == doctest::Approx(std::abs(spatial_fourier(g1, k))).epsilon(1e-13));
  }
}

TEST_CASE("radial transform only for the harmonic ground mode") {
  CHECK(radially_symmetric(harmonic_detector(1.0)));
  CHECK_FALSE(radially_symmetric(harmonic_detector(1.0, {1, 0, 0})));
  CHECK_FALSE(radially_symmetric(box_detector(1.0)));
  try {
    radial_fourier(box_detector(1.0), 1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::UnsupportedMode);
  }
  auto g = harmonic_detector(0.3);
  Vec3 k{0.4, -1.2, 2.2};
  double kn = std::sqrt(0.16 + 1.44 + 4.84);
  CHECK(std::abs(spatial_fourier(g, k)) == doctest::Approx(radial_fourier(g, kn)).epsilon(1e-13));
}

TEST_CASE("detector validation") {
  auto d = harmonic_detector(1.0);
  d.lambda = 0.0;
  CHECK_THROWS_AS(validate(d), Error);
  d = harmonic_detector(1.0);
  d.gap = -2.0;
  CHECK_THROWS_AS(validate(d), Error);
  d.gap = 4.0;
  CHECK(detector_gap(d) == 4.0);
  CHECK_THROWS_AS(validate(box_detector(1.0, {0, 1, 1})), Error);
}
