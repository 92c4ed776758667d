#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace harvest {

constexpr int kFWeightMaxN = 10000;

struct PuritySpec {
  double sigma = 1.0;
  double ell = 1.0;
  double mass_ell = 0.0;  // m·ℓ
  int dim = 3;
  double series_rel_tol = 1e-13;
};

struct PurityResult {
  double nu = 1.0;
  double qq_var = 0.0;
  double pp_var = 0.0;
  int terms_used = 0;
  double truncation_bound = 0.0;  // relative tail bound of the truncated sums
  double completeness = 1.0;      // truncated Σ c²
  bool converged = true;
};

void validate(const PuritySpec& p);

double squeezing_parameter(double sigma, double ell);

// F_d(n) = Σ_{|n|=n} Π binom(2n_i, n_i), exact.
boost::multiprecision::cpp_int f_weight(int n, int dim);

// F_d(n) / 4^n as a double (no overflow for large n), from the closed forms
// F_1 = binom(2n,n), F_2 = 4^n, F_3 = (2n+1) binom(2n,n).
double f_weight_scaled(int n, int dim);

// c² of the doubled index 2n (components beyond dim must be 0).
double overlap_coeff_sq(const std::array<int, 3>& n, double r, int dim);

// Throws TruncationFailure when the series does not converge within the
// term guard; evaluate_purity returns the partial result instead.
PurityResult symplectic_eigenvalue(const PuritySpec& p);
PurityResult evaluate_purity(const PuritySpec& p);

// Largest r* with ν(±r) ≤ 1 + threshold for r ∈ [-r*, r*]; the σ/ℓ range is
// [e^{-r*}, e^{r*}].
double purity_radius(double mass_ell, int dim, double threshold, double series_rel_tol = 1e-13);

}  // namespace harvest
