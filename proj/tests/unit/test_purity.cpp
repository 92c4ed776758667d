#include <boost/math/special_functions/binomial.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "doctest.h"
#include "harvest/errors.hpp"
#include "harvest/purity.hpp"

using namespace harvest;
using boost::multiprecision::cpp_int;

namespace {

cpp_int central_binomial(int n) {
  cpp_int c = 1;
  for (int k = 1; k <= n; ++k) c = c * (n + k) / k;
  return c;
}

// Enumerates every d-tuple with |n| = total.
cpp_int brute_force_F(int total, int dim) {
  cpp_int s = 0;
  if (dim == 1) return central_binomial(total);
  for (int a = 0; a <= total; ++a) {
    if (dim == 2) {
      s += central_binomial(a) * central_binomial(total - a);
    } else {
      for (int b = 0; a + b <= total; ++b)
        s += central_binomial(a) * central_binomial(b) * central_binomial(total - a - b);
    }
  }
  return s;
}

// Coefficient of x^n in (1-4x)^{-d/2}: 2^n Π_{j<n}(d+2j) / n!.
cpp_int generating_coefficient(int n, int dim) {
  cpp_int num = 1, den = 1;
  for (int j = 0; j < n; ++j) {
    num *= 2 * (dim + 2 * j);
    den *= j + 1;
  }
  return num / den;
}

// ν by summing c²_{2n} over explicit multi-indices (no F_d, no closed forms).
double brute_force_nu(double r, double mass_ell, int dim, int nmax) {
  double up = 0.0, dn = 0.0;
  int lim1 = dim >= 2 ? nmax : 0, lim2 = dim >= 3 ? nmax : 0;
  for (int a = 0; a <= nmax; ++a)
    for (int b = 0; b <= lim1; ++b)
      for (int c = 0; c <= lim2; ++c) {
        double c2 = overlap_coeff_sq({a, b, c}, r, dim);
        double e = std::sqrt(mass_ell * mass_ell + 4.0 * (a + b + c) + dim);
        up += c2 * e;
        dn += c2 / e;
      }
  return std::sqrt(up * dn);
}

}  // namespace

TEST_CASE("squeezing parameter") {
  CHECK(squeezing_parameter(2.0, 2.0) == 0.0);
  CHECK(squeezing_parameter(M_E * 0.3, 0.3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(squeezing_parameter(0.3, 1.7) == -squeezing_parameter(1.7, 0.3));
  CHECK_THROWS_AS(squeezing_parameter(0.0, 1.0), Error);
}

TEST_CASE("F_d small values") {
  CHECK(f_weight(2, 1) == 6);
  CHECK(f_weight(1, 3) == 6);
  CHECK(f_weight(2, 3) == 30);
  CHECK(f_weight(0, 2) == 1);
}

TEST_CASE("F_d matches brute-force enumeration for n <= 8") {
  for (int d = 1; d <= 3; ++d)
    for (int n = 0; n <= 8; ++n) CHECK(f_weight(n, d) == brute_force_F(n, d));
}

TEST_CASE("F_d matches the generating function for the first 20 coefficients") {
  for (int d = 1; d <= 3; ++d)
    for (int n = 0; n < 20; ++n) CHECK(f_weight(n, d) == generating_coefficient(n, d));
}

TEST_CASE("scaled weights agree with the exact integers") {
  for (int d = 1; d <= 3; ++d)
    for (int n = 0; n <= 200; n += 7) {
      cpp_int f = f_weight(n, d);
      cpp_int p4 = cpp_int(1) << (2 * n);
      // Exact ratio to double via a 60-bit scaled quotient.
      double exact = static_cast<double>((f << 60) / p4) / std::ldexp(1.0, 60);
      CHECK(f_weight_scaled(n, d) == doctest::Approx(exact).epsilon(1e-13));
    }
  CHECK(std::isfinite(f_weight_scaled(10000, 3)));
}

TEST_CASE("F_d guards") {
  try {
    f_weight(10001, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::TruncationFailure);
  }
  CHECK_THROWS_AS(f_weight(3, 4), Error);
  CHECK_THROWS_AS(f_weight(-1, 1), Error);
}

TEST_CASE("overlap coefficients") {
  CHECK(overlap_coeff_sq({0, 0, 0}, 0.0, 3) == 1.0);
  CHECK(overlap_coeff_sq({1, 0, 2}, 0.0, 3) == 0.0);
  double r = 0.7, t = std::tanh(r);
  double expect = std::pow(std::cosh(r), -2) * std::pow(t * t / 4, 3) * 2.0 * 6.0;
  CHECK(overlap_coeff_sq({1, 2, 0}, r, 2) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(overlap_coeff_sq({0, 0, 1}, r, 2), Error);
  for (int d = 1; d <= 3; ++d) {
    auto res = symplectic_eigenvalue({std::exp(0.9), 1.0, 10.0, d, 1e-13});
    CHECK(res.completeness <= 1.0 + 1e-12);
    CHECK(res.completeness >= 1.0 - 1e-8);
  }
}

TEST_CASE("nu at r = 0 is exactly 1") {
  for (int d = 1; d <= 3; ++d)
    for (double m : {0.0, 1.0, 10.0}) {
      auto res = symplectic_eigenvalue({0.8, 0.8, m, d, 1e-13});
      CHECK(std::abs(res.nu - 1.0) <= 1e-12);
      CHECK(res.terms_used >= 1);
    }
}

TEST_CASE("nu matches the explicit multi-index sum") {
  for (int d = 1; d <= 3; ++d)
    for (double r : {0.3, -0.6, 1.0}) {
      double ref = brute_force_nu(r, 10.0, d, d == 3 ? 90 : 120);
      auto res = symplectic_eigenvalue({std::exp(r), 1.0, 10.0, d, 1e-14});
      CHECK(res.nu == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("nu properties") {
  for (int d = 1; d <= 3; ++d)
    for (double r : {0.05, 0.4, 1.3, 2.5}) {
      auto p = symplectic_eigenvalue({std::exp(r), 1.0, 10.0, d, 1e-13});
      auto m = symplectic_eigenvalue({std::exp(-r), 1.0, 10.0, d, 1e-13});
      CHECK(std::abs(p.nu - m.nu) <= 1e-10);
      CHECK(p.nu >= 1.0 - 1e-12);
      CHECK(p.nu * p.nu == doctest::Approx(4 * p.qq_var * p.pp_var).epsilon(1e-12));
      CHECK(p.truncation_bound < 1e-13);
    }
  // Scale covariance: ν depends on σ/ℓ only.
  auto a = symplectic_eigenvalue({2.0, 1.0, 3.0, 2, 1e-13});
  auto b = symplectic_eigenvalue({0.2, 0.1, 3.0, 2, 1e-13});
  CHECK(a.nu == doctest::Approx(b.nu).epsilon(1e-14));
}

TEST_CASE("dimension ordering at m ell = 10") {
  for (double x = 0.1; x <= 10.0; x *= 1.25) {
    if (std::abs(x - 1.0) < 1e-9) continue;
    double n1 = symplectic_eigenvalue({x, 1.0, 10.0, 1, 1e-13}).nu;
    double n2 = symplectic_eigenvalue({x, 1.0, 10.0, 2, 1e-13}).nu;
    double n3 = symplectic_eigenvalue({x, 1.0, 10.0, 3, 1e-13}).nu;
    CHECK(n1 <= n2);
    CHECK(n2 <= n3);
  }
}

TEST_CASE("truncation failure for extreme squeezing") {
  PuritySpec p{std::exp(12.0), 1.0, 10.0, 3, 1e-13};
  auto partial = evaluate_purity(p);
  CHECK_FALSE(partial.converged);
  try {
    symplectic_eigenvalue(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Status::TruncationFailure);
  }
}

TEST_CASE("purity radius brackets the threshold") {
  double r = purity_radius(10.0, 3, 0.05);
  CHECK(r > 0.5);
  auto in = symplectic_eigenvalue({std::exp(0.999 * r), 1.0, 10.0, 3, 1e-13});
  auto out = symplectic_eigenvalue({std::exp(1.001 * r), 1.0, 10.0, 3, 1e-13});
  CHECK(in.nu <= 1.05);
  CHECK(out.nu > 1.05);
  CHECK_THROWS_AS(purity_radius(10.0, 3, 0.0), Error);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(PuritySpec{0.0, 1.0, 1.0, 3, 1e-13}), Error);
  CHECK_THROWS_AS(validate(PuritySpec{1.0, 1.0, -1.0, 3, 1e-13}), Error);
  CHECK_THROWS_AS(validate(PuritySpec{1.0, 1.0, 1.0, 0, 1e-13}), Error);
  CHECK_THROWS_AS(validate(PuritySpec{1.0, 1.0, 1.0, 1, 0.0}), Error);
}
