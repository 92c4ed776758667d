#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace harvest {

using cplx = std::complex<double>;

enum class QuadMethod { AdaptiveGK, TensorGL, MonteCarlo };

struct QuadratureSettings {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  long max_evaluations = 2000000;
  QuadMethod method = QuadMethod::AdaptiveGK;
  // Use the Dawson closed form for the time-ordered kernel once it has
  // passed its self-check against the quadrature path.
  bool closed_form_kernel = true;
  unsigned mc_seed = 12345;
  int mc_samples = 4096;
};

void validate(const QuadratureSettings& q);

const char* method_name(QuadMethod m);
QuadMethod method_from_name(const std::string& s);

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  long evaluations = 0;
  bool converged = true;
};

// Vector-valued adaptive G7K15 on [a,b]. The integrand writes ncomp complex
// values for abscissa x. Component i is converged once its error is below
//   max(abs_tol, rel_tol * ref_i, 50 eps * |f_i|-integral)
// where ref_i = |I_i| unless ref_of[i] >= 0 names another component whose
// magnitude is used instead (ref_of[i] == -2 means sqrt(|I_j| |I_k|) with
// j,k given in ref_pair[i]).
struct VectorQuadSpec {
  int ncomp = 1;
  std::vector<int> ref_of;                   // -1: self
  std::vector<std::pair<int, int>> ref_pair; // used when ref_of[i] == -2
  int initial_panels = 1;
};

struct VectorQuadResult {
  std::vector<cplx> value;
  std::vector<double> error;
  std::vector<double> abs_integral;
  long evaluations = 0;
  bool converged = true;
  double worst_ratio = 0.0;  // max_i error_i / target_i
};

using VecIntegrand = std::function<void(double x, cplx* out)>;

VectorQuadResult integrate_vector(const VecIntegrand& f, double a, double b,
                                  const VectorQuadSpec& spec, const QuadratureSettings& q);

QuadResult<double> integrate(const std::function<double(double)>& f, double a, double b,
                             const QuadratureSettings& q);
QuadResult<cplx> integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                                   const QuadratureSettings& q);

// Gauss-Legendre nodes/weights on [-1,1], Newton on the Legendre recurrence.
// Cached per order; safe for concurrent use.
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

}  // namespace harvest
