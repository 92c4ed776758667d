#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "doctest.h"
#include "harvest/errors.hpp"
#include "harvest/quadrature.hpp"

using namespace harvest;

TEST_CASE("gauss_legendre matches Boost nodes and weights") {
  using boost::math::quadrature::gauss;
  const auto& g = gauss_legendre(20);
  REQUIRE(g.x.size() == 20);
  // Boost stores the non-negative half, ascending from 0.
  auto bx = gauss<double, 20>::abscissa();
  auto bw = gauss<double, 20>::weights();
  for (size_t i = 0; i < bx.size(); ++i) {
    bool found = false;
    for (size_t j = 0; j < g.x.size(); ++j)
      if (std::abs(g.x[j] - bx[i]) < 1e-14) {
        CHECK(g.w[j] == doctest::Approx(bw[i]).epsilon(1e-13));
        found = true;
      }
    CHECK(found);
  }
}

TEST_CASE("gauss_legendre is exact for polynomials up to degree 2n-1") {
  const auto& g = gauss_legendre(7);
  for (int p = 0; p <= 13; ++p) {
    double s = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], p);
    double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gauss_legendre(0), Error);
}

TEST_CASE("adaptive integration of smooth and peaked integrands") {
  QuadratureSettings q;
  q.rel_tol = 1e-12;
  auto r = integrate([](double x) { return std::exp(x); }, 0.0, 1.0, q);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));

  auto p = integrate([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, q);
  CHECK(p.converged);
  CHECK(p.value == doctest::Approx(2.0 * std::atan(1e2) / 1e-2).epsilon(1e-11));

  auto c = integrate_complex([](double x) { return std::polar(1.0, 40.0 * x); }, 0.0, M_PI, q);
  CHECK(std::abs(c.value) < 1e-12);
}

TEST_CASE("vector integration tracks each component") {
  QuadratureSettings q;
  q.rel_tol = 1e-11;
  VectorQuadSpec s;
  s.ncomp = 3;
  s.ref_of = {-1, -1, 0};
  s.ref_pair.assign(3, {0, 0});
  auto r = integrate_vector(
      [](double x, cplx* o) {
        o[0] = std::exp(-x * x);
        o[1] = cplx(std::cos(x), std::sin(x));
        o[2] = 1e-9 * std::sin(3.0 * x);
      },
      0.0, 4.0, s, q);
  CHECK(r.converged);
  CHECK(r.value[0].real() == doctest::Approx(0.5 * std::sqrt(M_PI) * std::erf(4.0)).epsilon(1e-12));
  CHECK(r.value[1].real() == doctest::Approx(std::sin(4.0)).epsilon(1e-12));
  CHECK(r.value[1].imag() == doctest::Approx(1.0 - std::cos(4.0)).epsilon(1e-12));
  CHECK(std::abs(r.value[2].real() - 1e-9 * (1.0 - std::cos(12.0)) / 3.0) < 1e-20);
}

TEST_CASE("evaluation budget exhaustion is reported, not hidden") {
  QuadratureSettings q;
  q.rel_tol = 1e-14;
  q.max_evaluations = 60;
  auto r = integrate([](double x) { return std::sin(200.0 * x) * std::exp(-x); }, 0.0, 10.0, q);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= 60 + 30);
}

TEST_CASE("settings validation and method names") {
  QuadratureSettings q;
  q.rel_tol = 0.0;
  CHECK_THROWS_AS(validate(q), Error);
  q = {};
  q.max_evaluations = 0;
  CHECK_THROWS_AS(validate(q), Error);
  for (auto m : {QuadMethod::AdaptiveGK, QuadMethod::TensorGL, QuadMethod::MonteCarlo})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS_AS(method_from_name("simpson"), Error);
}
