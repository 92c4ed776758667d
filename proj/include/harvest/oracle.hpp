#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "harvest/harvesting.hpp"
#include "harvest/types.hpp"

namespace harvest {

enum class Boundary { Periodic, Dirichlet };

// Single-mode probe: H_D = (p² + Ω² q²)/2, coupled by λ ζ(t) q (vᵀ q_target).
struct LatticeProbe {
  double gap = 1.0;
  std::vector<double> profile;  // unit Euclidean norm over target sites
  double lambda = 1.0;
  SwitchingSpec switching;
};

// Probe field on a chain of sites overlaying target sites
// [first_site, first_site + potential.size()), Dirichlet ends, coupled
// site-locally by λ ζ(t) Σ_x q_D(x) q(x).
struct ProbeChain {
  int first_site = 0;
  std::vector<double> potential;  // on-site V_x (enters as 2V)
  double probe_mass = 0.0;
  double lambda = 1.0;
  SwitchingSpec switching;
};

struct LatticeModel {
  int n_sites = 64;
  double spacing = 0.25;
  double target_mass = 1.0;
  Boundary boundary = Boundary::Periodic;
  std::vector<LatticeProbe> probes;
  std::vector<ProbeChain> chains;  // when non-empty, probes are ignored
};

// 2n×2n covariance in (q1,p1,...,qn,pn) ordering; vacuum of a unit-frequency
// oscillator is ½·I.
struct CovarianceState {
  Eigen::MatrixXd sigma;
  Eigen::VectorXd mean;
};

struct NormalModes {
  Eigen::VectorXd frequencies;  // ascending
  Eigen::MatrixXd profiles;     // columns, orthonormal
};

void validate(const LatticeModel& m);
LatticeModel lattice_from_json(const std::string& text);
std::string lattice_to_json(const LatticeModel& m);

// Unit-norm Gaussian site profile centred at `center` (length units, site j at j·a).
std::vector<double> gaussian_site_profile(int n_sites, double spacing, double center, double width);

Eigen::MatrixXd target_stiffness(const LatticeModel& m);
NormalModes normal_modes(const LatticeModel& m);
NormalModes chain_modes(const ProbeChain& c, double spacing);

// Single-mode probes equivalent to the model: its probes, or every normal
// mode of every chain (group = chain index, lowest mode first).
struct EffectiveProbe {
  LatticeProbe probe;
  int group = 0;
  int mode = 0;
};
std::vector<EffectiveProbe> effective_probes(const LatticeModel& m);

// Full-system description used by evolve_covariance: site-basis target
// followed by single-mode probes or chain sites. Unit masses; position
// stiffness K(t) = K0 + Σ_i ζ_i(t) C_i.
struct QuadraticSystem {
  Eigen::MatrixXd K0;
  std::vector<std::pair<SwitchingSpec, Eigen::MatrixXd>> couplings;
  int n = 0;
};
QuadraticSystem build_system(const LatticeModel& m);
CovarianceState vacuum_state(const QuadraticSystem& s);

CovarianceState evolve_covariance(const QuadraticSystem& s, const CovarianceState& initial, double dt,
                                  double t0, double t1);

// Reduced covariance of the modes labelled by the given (q,p) index pairs.
Eigen::MatrixXd reduce(const Eigen::MatrixXd& sigma, const std::vector<int>& modes);

double gaussian_negativity(const Eigen::Matrix4d& sigma);
double min_symplectic_eigenvalue_pt(const Eigen::Matrix4d& sigma);

// Exact two-probe reduced covariance (normalized quadratures, vacuum ½·I)
// of effective probes a and b, via interaction-picture propagation.
struct ExactOptions {
  double dt = 0.002;
  double window = 6.0;  // in units of T around the switching center
};
Eigen::Matrix4d exact_probe_covariance(const LatticeModel& m, int a, int b, const ExactOptions& o = {});
// Same, coupling only the listed effective probes.
Eigen::Matrix4d exact_probe_covariance(const LatticeModel& m, const std::vector<int>& coupled, int a, int b,
                                       const ExactOptions& o = {});

// Leading-order prediction from the discrete mode sum for effective probes a,b.
HarvestingResult perturbative_prediction(const LatticeModel& m, int a = 0, int b = 1);

struct ScalingRow {
  double lambda = 0.0;
  double n_exact = 0.0;
  double n_pert = 0.0;
  double residual = 0.0;
  double n_multimode = 0.0;     // chain-mode negativity (multimode runs)
  double cov_difference = 0.0;  // ||σ_multimode − σ_single||_F
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double slope = 0.0;
  int points_used = 0;
  double multimode_slope = 0.0;  // |N_multimode − N_pert|
  int multimode_points = 0;
  double cov_slope = 0.0;        // ||σ_multimode − σ_single||_F
  int cov_points = 0;
  bool multimode = false;
};

struct FitResult {
  double slope;
  int used;
};
// Least-squares slope of log y vs log x over points with y > floor.
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor = 1e-13);

// λ values multiply every probe's coupling (the model's λ fields are replaced).
// For models with chains the single-mode comparison uses the lowest chain
// modes as detectors.
ScalingResult residual_scaling(const LatticeModel& m, const std::vector<double>& lambdas,
                               const ExactOptions& o = {});

}  // namespace harvest
