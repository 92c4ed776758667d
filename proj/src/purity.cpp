#include "harvest/purity.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include "harvest/errors.hpp"

namespace harvest {

using boost::multiprecision::cpp_int;

namespace {

struct WeightTable {
  std::mutex mu;
  std::vector<cpp_int> central;            // binom(2n, n)
  std::array<std::vector<cpp_int>, 4> f;   // f[d][n]

  void extend(int n) {
    while (static_cast<int>(central.size()) <= n) {
      int k = static_cast<int>(central.size());
      if (k == 0) {
        central.push_back(1);
      } else {
        // binom(2k,k) = binom(2k-2,k-1) * 2(2k-1)/k
        central.push_back(central.back() * (2 * (2 * k - 1)) / k);
      }
    }
    for (int d = 1; d <= 3; ++d) {
      auto& fd = f[d];
      while (static_cast<int>(fd.size()) <= n) {
        int k = static_cast<int>(fd.size());
        cpp_int v;
        if (d == 1) {
          v = central[k];
        } else {
          const auto& prev = f[d - 1];
          for (int j = 0; j <= k; ++j) v += prev[j] * central[k - j];
        }
        fd.push_back(v);
      }
    }
  }
};

// binom(2n,n)/4^n by the product (2k-1)/(2k).
double central_scaled(int n) {
  double c = 1.0;
  for (int k = 1; k <= n; ++k) c *= (2.0 * k - 1.0) / (2.0 * k);
  return c;
}

// F_1 = binom(2n,n), F_2 = 4^n, F_3 = (2n+1) binom(2n,n); c = F_1/4^n.
double scaled_from_central(double c, int n, int dim) {
  if (dim == 1) return c;
  if (dim == 2) return 1.0;
  return (2.0 * n + 1.0) * c;
}

WeightTable& table() {
  static WeightTable t;
  return t;
}

void check_dim(int dim) {
  if (dim < 1 || dim > 3) fail(Status::InvalidArgument, "dim must be 1, 2 or 3");
}

void check_n(int n) {
  if (n < 0) fail(Status::InvalidArgument, "n must be >= 0");
  if (n > kFWeightMaxN) fail(Status::TruncationFailure, "n above the F_d guard " + std::to_string(kFWeightMaxN));
}

}  // namespace

void validate(const PuritySpec& p) {
  if (!(p.sigma > 0) || !std::isfinite(p.sigma)) fail(Status::InvalidArgument, "sigma must be positive");
  if (!(p.ell > 0) || !std::isfinite(p.ell)) fail(Status::InvalidArgument, "ell must be positive");
  if (!(p.mass_ell >= 0) || !std::isfinite(p.mass_ell)) fail(Status::InvalidArgument, "mass_ell must be >= 0");
  if (!(p.series_rel_tol > 0)) fail(Status::InvalidArgument, "series_rel_tol must be positive");
  check_dim(p.dim);
}

double squeezing_parameter(double sigma, double ell) {
  if (!(sigma > 0) || !(ell > 0)) fail(Status::InvalidArgument, "squeezing_parameter: inputs must be positive");
  return std::log(sigma / ell);
}

cpp_int f_weight(int n, int dim) {
  check_dim(dim);
  check_n(n);
  auto& t = table();
  std::lock_guard<std::mutex> lock(t.mu);
  t.extend(n);
  return t.f[dim][n];
}

double f_weight_scaled(int n, int dim) {
  check_dim(dim);
  check_n(n);
  return scaled_from_central(central_scaled(n), n, dim);
}

double overlap_coeff_sq(const std::array<int, 3>& n, double r, int dim) {
  check_dim(dim);
  int total = 0;
  double prod = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (n[i] < 0) fail(Status::InvalidIndex, "overlap_coeff_sq: negative index");
    if (i >= dim) {
      if (n[i] != 0) fail(Status::InvalidIndex, "overlap_coeff_sq: index beyond dim must be 0");
      continue;
    }
    total += n[i];
    prod *= f_weight_scaled(n[i], 1);  // binom(2n,n)/4^n
  }
  double th2 = std::tanh(r) * std::tanh(r);
  return std::pow(std::cosh(r), -dim) * std::pow(th2, total) * prod;
}

PurityResult evaluate_purity(const PuritySpec& p) {
  validate(p);
  const double r = squeezing_parameter(p.sigma, p.ell);
  const double th2 = std::tanh(r) * std::tanh(r);
  const double a = p.mass_ell * p.mass_ell;
  const int d = p.dim;
  const double tol = p.series_rel_tol;

  auto majorant_ratio = [&](int n) {
    // tanh^{2n} binom(n+d-1,d-1) sqrt(a+4n+d), ratio of term n+1 to term n
    double poly = 1.0;
    for (int j = 1; j < d; ++j) poly *= double(n + 1 + j) / double(n + j);
    return th2 * poly * std::sqrt((a + 4.0 * (n + 1) + d) / (a + 4.0 * n + d));
  };

  double s_up = 0.0, s_dn = 0.0, s_c = 0.0;
  double pw = 1.0;  // th2^n
  double central = 1.0;  // binom(2n,n)/4^n
  int small_run = 0;
  PurityResult res;
  res.converged = false;
  int n = 0;
  for (; n <= kFWeightMaxN; ++n) {
    if (n > 0) central *= (2.0 * n - 1.0) / (2.0 * n);
    double w = scaled_from_central(central, n, d);
    double base = pw * w;
    double sq = std::sqrt(a + 4.0 * n + d);
    double tu = base * sq, td = base / sq;
    s_up += tu;
    s_dn += td;
    s_c += base;
    bool small = tu <= tol * s_up && td <= tol * s_dn;
    small_run = small ? small_run + 1 : 0;
    pw *= th2;
    if (small_run >= 5 || base == 0.0) {
      // geometric tail bound from the majorant
      double binom = 1.0;
      for (int j = 1; j < d; ++j) binom *= double(n + 1 + j) / j;
      double next = pw * binom * std::sqrt(a + 4.0 * (n + 1) + d);
      double q = majorant_ratio(n + 1);
      double tail = q < 1.0 ? next / (1.0 - q) : INFINITY;
      double bound = s_up > 0 ? tail / s_up : 0.0;
      if (base == 0.0 || bound < tol) {
        res.truncation_bound = base == 0.0 ? std::numeric_limits<double>::min() : std::max(bound, 1e-300);
        res.converged = true;
        ++n;
        break;
      }
    }
  }
  res.terms_used = std::min(n, kFWeightMaxN + 1);
  double pre = std::pow(std::cosh(r), -d);
  res.completeness = pre * s_c;
  res.qq_var = 0.5 * p.ell * pre * s_dn;
  res.pp_var = 0.5 / p.ell * pre * s_up;
  res.nu = std::sqrt(pre * pre * s_up * s_dn);
  if (!res.converged) res.truncation_bound = INFINITY;
  return res;
}

PurityResult symplectic_eigenvalue(const PuritySpec& p) {
  auto r = evaluate_purity(p);
  if (!r.converged)
    fail(Status::TruncationFailure, "symplectic_eigenvalue: series did not converge within the term guard",
         r.truncation_bound);
  return r;
}

double purity_radius(double mass_ell, int dim, double threshold, double series_rel_tol) {
  if (!(threshold > 0)) fail(Status::InvalidArgument, "purity_radius: threshold must be positive");
  auto nu_at = [&](double r) {
    PuritySpec s;
    s.sigma = std::exp(r);
    s.ell = 1.0;
    s.mass_ell = mass_ell;
    s.dim = dim;
    s.series_rel_tol = series_rel_tol;
    return symplectic_eigenvalue(s).nu;
  };
  double lo = 0.0, hi = 0.5;
  while (nu_at(hi) <= 1.0 + threshold) {
    lo = hi;
    hi += 0.5;
    if (hi > 6.0) fail(Status::TruncationFailure, "purity_radius: threshold not reached for r <= 6");
  }
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (nu_at(mid) <= 1.0 + threshold ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace harvest
