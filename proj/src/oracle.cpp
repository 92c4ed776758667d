#include "harvest/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "harvest/errors.hpp"
#include "harvest/kernels.hpp"
#include "harvest/smearing.hpp"
#include "json.hpp"

namespace harvest {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) fail(Status::InvalidArgument, path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail(Status::InvalidArgument, path + "." + it.key() + ": unknown key");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(Status::InvalidArgument, path + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(Status::InvalidArgument, path + "." + key + ": " + e.what());
  }
}

SwitchingSpec switching_from(const json& j, const std::string& path) {
  check_keys(j, {"T", "center_time"}, path);
  SwitchingSpec s;
  s.T = get<double>(j, "T", path);
  if (j.contains("center_time")) s.center_time = get<double>(j, "center_time", path);
  return s;
}

json switching_to(const SwitchingSpec& s) { return {{"T", s.T}, {"center_time", s.center_time}}; }

// Right-multiply the (q,p) column pair of each mode by the free propagator
// U(t) = [[cos ωt, sin ωt/ω], [-ω sin ωt, cos ωt]].
void rotate_columns(MatrixXd& Z, const VectorXd& w, double t) {
  for (int m = 0; m < w.size(); ++m) {
    double c = std::cos(w[m] * t), s = std::sin(w[m] * t);
    for (int r = 0; r < Z.rows(); ++r) {
      double zq = Z(r, 2 * m), zp = Z(r, 2 * m + 1);
      Z(r, 2 * m) = zq * c - zp * w[m] * s;
      Z(r, 2 * m + 1) = zq * s / w[m] + zp * c;
    }
  }
}

void sign_gauge(MatrixXd& v) {
  for (int c = 0; c < v.cols(); ++c) {
    Eigen::Index i;
    v.col(c).cwiseAbs().maxCoeff(&i);
    if (v(i, c) < 0) v.col(c) *= -1.0;
  }
}

NormalModes diagonalize(const MatrixXd& K, const char* what) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
  if (es.info() != Eigen::Success) fail(Status::Internal, std::string(what) + ": eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0)
    fail(Status::UnstablePotential, std::string(what) + ": non-positive eigenvalue " +
                                        std::to_string(es.eigenvalues().minCoeff()));
  NormalModes nm;
  nm.frequencies = es.eigenvalues().cwiseSqrt();
  nm.profiles = es.eigenvectors();
  sign_gauge(nm.profiles);
  return nm;
}

}  // namespace

void validate(const LatticeModel& m) {
  if (m.n_sites < 2) fail(Status::InvalidArgument, "lattice.n_sites must be >= 2");
  if (!(m.spacing > 0)) fail(Status::InvalidArgument, "lattice.spacing must be positive");
  if (!(m.target_mass > 0)) fail(Status::InvalidArgument, "lattice.target_mass must be positive");
  for (size_t i = 0; i < m.probes.size(); ++i) {
    const auto& p = m.probes[i];
    std::string path = "lattice.probes[" + std::to_string(i) + "]";
    if (!(p.gap > 0)) fail(Status::InvalidArgument, path + ".gap must be positive");
    if (!(p.lambda >= 0)) fail(Status::InvalidArgument, path + ".lambda must be >= 0");
    validate(p.switching);
    if (static_cast<int>(p.profile.size()) != m.n_sites)
      fail(Status::InvalidArgument, path + ".profile must have n_sites entries");
    double n2 = 0.0;
    for (double v : p.profile) n2 += v * v;
    if (std::abs(n2 - 1.0) > 1e-9) fail(Status::InvalidArgument, path + ".profile must have unit norm");
  }
  for (size_t i = 0; i < m.chains.size(); ++i) {
    const auto& c = m.chains[i];
    std::string path = "lattice.chains[" + std::to_string(i) + "]";
    if (c.potential.size() < 2) fail(Status::InvalidArgument, path + ".potential needs >= 2 sites");
    if (c.first_site < 0 || c.first_site >= m.n_sites)
      fail(Status::InvalidArgument, path + ".first_site out of range");
    if (m.boundary == Boundary::Dirichlet && c.first_site + static_cast<int>(c.potential.size()) > m.n_sites)
      fail(Status::InvalidArgument, path + " extends beyond the lattice");
    if (static_cast<int>(c.potential.size()) > m.n_sites)
      fail(Status::InvalidArgument, path + " longer than the lattice");
    if (!(c.probe_mass >= 0)) fail(Status::InvalidArgument, path + ".probe_mass must be >= 0");
    if (!(c.lambda >= 0)) fail(Status::InvalidArgument, path + ".lambda must be >= 0");
    validate(c.switching);
  }
}

std::vector<double> gaussian_site_profile(int n_sites, double spacing, double center, double width) {
  if (n_sites < 1 || !(spacing > 0) || !(width > 0))
    fail(Status::InvalidArgument, "gaussian_site_profile: bad arguments");
  std::vector<double> v(n_sites);
  double n2 = 0.0;
  for (int j = 0; j < n_sites; ++j) {
    double x = (j * spacing - center) / width;
    v[j] = std::exp(-0.5 * x * x);
    n2 += v[j] * v[j];
  }
  if (!(n2 > 0)) fail(Status::InvalidArgument, "gaussian_site_profile: profile vanishes on the lattice");
  for (double& x : v) x /= std::sqrt(n2);
  return v;
}

LatticeModel lattice_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Status::InvalidArgument, std::string("lattice: JSON parse error: ") + e.what());
  }
  check_keys(j, {"n_sites", "spacing", "target_mass", "boundary", "probes", "chains"}, "lattice");
  LatticeModel m;
  m.n_sites = get<int>(j, "n_sites", "lattice");
  m.spacing = get<double>(j, "spacing", "lattice");
  m.target_mass = get<double>(j, "target_mass", "lattice");
  if (j.contains("boundary")) {
    auto b = get<std::string>(j, "boundary", "lattice");
    if (b == "periodic")
      m.boundary = Boundary::Periodic;
    else if (b == "dirichlet")
      m.boundary = Boundary::Dirichlet;
    else
      fail(Status::InvalidArgument, "lattice.boundary: expected periodic or dirichlet");
  }
  if (j.contains("probes")) {
    const auto& arr = j.at("probes");
    if (!arr.is_array()) fail(Status::InvalidArgument, "lattice.probes: expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      std::string path = "lattice.probes[" + std::to_string(i) + "]";
      const auto& pj = arr[i];
      check_keys(pj, {"gap", "profile", "gaussian", "lambda", "switching"}, path);
      LatticeProbe p;
      p.gap = get<double>(pj, "gap", path);
      p.lambda = get<double>(pj, "lambda", path);
      p.switching = switching_from(pj.at("switching"), path + ".switching");
      if (pj.contains("profile") == pj.contains("gaussian"))
        fail(Status::InvalidArgument, path + ": exactly one of profile / gaussian is required");
      if (pj.contains("profile")) {
        p.profile = get<std::vector<double>>(pj, "profile", path);
      } else {
        const auto& g = pj.at("gaussian");
        check_keys(g, {"center", "width"}, path + ".gaussian");
        p.profile = gaussian_site_profile(m.n_sites, m.spacing, get<double>(g, "center", path + ".gaussian"),
                                          get<double>(g, "width", path + ".gaussian"));
      }
      m.probes.push_back(std::move(p));
    }
  }
  if (j.contains("chains")) {
    const auto& arr = j.at("chains");
    if (!arr.is_array()) fail(Status::InvalidArgument, "lattice.chains: expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      std::string path = "lattice.chains[" + std::to_string(i) + "]";
      const auto& cj = arr[i];
      check_keys(cj, {"first_site", "potential", "harmonic", "probe_mass", "lambda", "switching"}, path);
      ProbeChain c;
      c.first_site = get<int>(cj, "first_site", path);
      c.probe_mass = cj.contains("probe_mass") ? get<double>(cj, "probe_mass", path) : 0.0;
      c.lambda = get<double>(cj, "lambda", path);
      c.switching = switching_from(cj.at("switching"), path + ".switching");
      if (cj.contains("potential") == cj.contains("harmonic"))
        fail(Status::InvalidArgument, path + ": exactly one of potential / harmonic is required");
      if (cj.contains("potential")) {
        c.potential = get<std::vector<double>>(cj, "potential", path);
      } else {
        const auto& h = cj.at("harmonic");
        check_keys(h, {"sites", "ell"}, path + ".harmonic");
        int ns = get<int>(h, "sites", path + ".harmonic");
        double ell = get<double>(h, "ell", path + ".harmonic");
        if (ns < 2 || !(ell > 0)) fail(Status::InvalidArgument, path + ".harmonic: bad sites/ell");
        c.potential.resize(ns);
        for (int s = 0; s < ns; ++s) {
          double x = (s - 0.5 * (ns - 1)) * m.spacing;
          c.potential[s] = x * x / (2.0 * std::pow(ell, 4));
        }
      }
      m.chains.push_back(std::move(c));
    }
  }
  validate(m);
  return m;
}

std::string lattice_to_json(const LatticeModel& m) {
  json j;
  j["n_sites"] = m.n_sites;
  j["spacing"] = m.spacing;
  j["target_mass"] = m.target_mass;
  j["boundary"] = m.boundary == Boundary::Periodic ? "periodic" : "dirichlet";
  j["probes"] = json::array();
  for (const auto& p : m.probes)
    j["probes"].push_back(
        {{"gap", p.gap}, {"profile", p.profile}, {"lambda", p.lambda}, {"switching", switching_to(p.switching)}});
  j["chains"] = json::array();
  for (const auto& c : m.chains)
    j["chains"].push_back({{"first_site", c.first_site},
                           {"potential", c.potential},
                           {"probe_mass", c.probe_mass},
                           {"lambda", c.lambda},
                           {"switching", switching_to(c.switching)}});
  return j.dump(2);
}

MatrixXd target_stiffness(const LatticeModel& m) {
  const int n = m.n_sites;
  const double ia2 = 1.0 / (m.spacing * m.spacing);
  MatrixXd K = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = m.target_mass * m.target_mass + 2.0 * ia2;
    if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = -ia2;
  }
  if (m.boundary == Boundary::Periodic) {
    if (n == 2) {
      K(0, 1) = K(1, 0) = -2.0 * ia2;
    } else {
      K(0, n - 1) = K(n - 1, 0) = -ia2;
    }
  }
  return K;
}

NormalModes normal_modes(const LatticeModel& m) {
  validate(m);
  return diagonalize(target_stiffness(m), "normal_modes");
}

NormalModes chain_modes(const ProbeChain& c, double spacing) {
  const int n = static_cast<int>(c.potential.size());
  const double ia2 = 1.0 / (spacing * spacing);
  MatrixXd K = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = c.probe_mass * c.probe_mass + 2.0 * ia2 + 2.0 * c.potential[i];
    if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = -ia2;
  }
  return diagonalize(K, "chain_modes");
}

std::vector<EffectiveProbe> effective_probes(const LatticeModel& m) {
  validate(m);
  std::vector<EffectiveProbe> out;
  if (m.chains.empty()) {
    for (size_t i = 0; i < m.probes.size(); ++i) out.push_back({m.probes[i], static_cast<int>(i), 0});
    return out;
  }
  for (size_t g = 0; g < m.chains.size(); ++g) {
    const auto& c = m.chains[g];
    auto nm = chain_modes(c, m.spacing);
    for (int k = 0; k < nm.frequencies.size(); ++k) {
      LatticeProbe p;
      p.gap = nm.frequencies[k];
      p.lambda = c.lambda;
      p.switching = c.switching;
      p.profile.assign(m.n_sites, 0.0);
      for (int s = 0; s < nm.profiles.rows(); ++s) p.profile[(c.first_site + s) % m.n_sites] = nm.profiles(s, k);
      out.push_back({std::move(p), static_cast<int>(g), k});
    }
  }
  return out;
}

QuadraticSystem build_system(const LatticeModel& m) {
  validate(m);
  const int nt = m.n_sites;
  QuadraticSystem s;
  if (m.chains.empty()) {
    const int np = static_cast<int>(m.probes.size());
    s.n = nt + np;
    s.K0 = MatrixXd::Zero(s.n, s.n);
    s.K0.topLeftCorner(nt, nt) = target_stiffness(m);
    for (int i = 0; i < np; ++i) {
      const auto& p = m.probes[i];
      s.K0(nt + i, nt + i) = p.gap * p.gap;
      MatrixXd C = MatrixXd::Zero(s.n, s.n);
      for (int j = 0; j < nt; ++j) C(nt + i, j) = C(j, nt + i) = p.lambda * p.profile[j];
      s.couplings.emplace_back(p.switching, C);
    }
    return s;
  }
  int total = nt;
  for (const auto& c : m.chains) total += static_cast<int>(c.potential.size());
  s.n = total;
  s.K0 = MatrixXd::Zero(total, total);
  s.K0.topLeftCorner(nt, nt) = target_stiffness(m);
  const double ia2 = 1.0 / (m.spacing * m.spacing);
  int off = nt;
  for (const auto& c : m.chains) {
    const int nc = static_cast<int>(c.potential.size());
    MatrixXd C = MatrixXd::Zero(total, total);
    for (int i = 0; i < nc; ++i) {
      s.K0(off + i, off + i) = c.probe_mass * c.probe_mass + 2.0 * ia2 + 2.0 * c.potential[i];
      if (i + 1 < nc) s.K0(off + i, off + i + 1) = s.K0(off + i + 1, off + i) = -ia2;
      int site = (c.first_site + i) % nt;
      C(off + i, site) = C(site, off + i) = c.lambda;
    }
    s.couplings.emplace_back(c.switching, C);
    off += nc;
  }
  return s;
}

CovarianceState vacuum_state(const QuadraticSystem& s) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.K0);
  if (es.eigenvalues().minCoeff() <= 0) fail(Status::UnstablePotential, "vacuum_state: K0 not positive definite");
  VectorXd w = es.eigenvalues().cwiseSqrt();
  MatrixXd V = es.eigenvectors();
  MatrixXd qq = 0.5 * V * w.cwiseInverse().asDiagonal() * V.transpose();
  MatrixXd pp = 0.5 * V * w.asDiagonal() * V.transpose();
  CovarianceState c;
  c.sigma = MatrixXd::Zero(2 * s.n, 2 * s.n);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) {
      c.sigma(2 * i, 2 * j) = qq(i, j);
      c.sigma(2 * i + 1, 2 * j + 1) = pp(i, j);
    }
  c.mean = VectorXd::Zero(2 * s.n);
  return c;
}

CovarianceState evolve_covariance(const QuadraticSystem& s, const CovarianceState& initial, double dt,
                                  double t0, double t1) {
  const int n = s.n;
  if (initial.sigma.rows() != 2 * n || initial.sigma.cols() != 2 * n)
    fail(Status::InvalidArgument, "evolve_covariance: covariance size mismatch");
  if (!(dt > 0)) fail(Status::StepSize, "evolve_covariance: dt must be positive");
  // Fastest frequency bound: sqrt of the largest eigenvalue of K0 plus the
  // largest coupling norm.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.K0, Eigen::EigenvaluesOnly);
  double kmax = es.eigenvalues().maxCoeff();
  for (const auto& c : s.couplings) kmax += c.second.norm();
  double wmax = std::sqrt(std::max(kmax, 0.0));
  if (dt * wmax >= 0.1)
    fail(Status::StepSize, "evolve_covariance: dt*omega_max = " + std::to_string(dt * wmax) + " >= 0.1");

  auto A_at = [&](double t) {
    MatrixXd K = s.K0;
    for (const auto& c : s.couplings) {
      double u = (t - c.first.center_time) / c.first.T;
      K += std::exp(-0.5 * M_PI * u * u) * c.second;
    }
    MatrixXd A = MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
      A(2 * i, 2 * i + 1) = 1.0;
      for (int j = 0; j < n; ++j) A(2 * i + 1, 2 * j) = -K(i, j);
    }
    return A;
  };
  auto rhs = [&](double t, const MatrixXd& S) {
    MatrixXd A = A_at(t);
    MatrixXd AS = A * S;
    return MatrixXd(AS + AS.transpose());
  };

  CovarianceState out = initial;
  MatrixXd& S = out.sigma;
  double span = t1 - t0;
  long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / dt)));
  double h = span / steps;
  for (long k = 0; k < steps; ++k) {
    double t = t0 + k * h;
    MatrixXd k1 = rhs(t, S);
    MatrixXd k2 = rhs(t + 0.5 * h, S + 0.5 * h * k1);
    MatrixXd k3 = rhs(t + 0.5 * h, S + 0.5 * h * k2);
    MatrixXd k4 = rhs(t + h, S + h * k3);
    S += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

MatrixXd reduce(const MatrixXd& sigma, const std::vector<int>& modes) {
  const int k = static_cast<int>(modes.size());
  MatrixXd r(2 * k, 2 * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(2 * a + i, 2 * b + j) = sigma(2 * modes[a] + i, 2 * modes[b] + j);
  return r;
}

double min_symplectic_eigenvalue_pt(const Eigen::Matrix4d& sigma) {
  Eigen::Matrix4d s = 0.5 * (sigma + sigma.transpose());
  // Physicality: σ + iΩ/2 ⪰ 0.
  Eigen::Matrix4cd h = s.cast<cplx>();
  for (int m = 0; m < 2; ++m) {
    h(2 * m, 2 * m + 1) += cplx(0.0, 0.5);
    h(2 * m + 1, 2 * m) -= cplx(0.0, 0.5);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9)
    fail(Status::Domain, "gaussian_negativity: covariance violates the uncertainty relation");
  Eigen::Matrix4d pt = s;
  pt.row(3) *= -1.0;
  pt.col(3) *= -1.0;
  // Symplectic eigenvalues are the moduli of the eigenvalues of the
  // Hermitian matrix i·σ^{1/2} Ω σ^{1/2}; avoids the cancellation of the
  // invariant-based formula near the vacuum.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> sq(pt);
  if (sq.eigenvalues().minCoeff() <= 0)
    fail(Status::Domain, "gaussian_negativity: covariance is not positive definite");
  Eigen::Matrix4d root = sq.operatorSqrt();
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  Eigen::Matrix4cd herm = cplx(0.0, 1.0) * (root * omega * root).cast<cplx>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> hs(herm, Eigen::EigenvaluesOnly);
  return hs.eigenvalues().cwiseAbs().minCoeff();
}

double gaussian_negativity(const Eigen::Matrix4d& sigma) {
  // Symplectic eigenvalues in units where the vacuum has 1.
  double nu = 2.0 * min_symplectic_eigenvalue_pt(sigma);
  if (!(nu > 0)) fail(Status::Domain, "gaussian_negativity: vanishing symplectic eigenvalue");
  // Deficits within the eigensolver's resolution of the vacuum count as zero.
  if (1.0 - nu <= 32.0 * std::numeric_limits<double>::epsilon()) return 0.0;
  return (1.0 - nu) / (2.0 * nu);
}

namespace {

struct ModeSystem {
  VectorXd w;    // probe gaps then target frequencies
  MatrixXd g;    // λ_I (v_I · e_j), P × n
  std::vector<SwitchingSpec> sw;
  int P = 0;
};

ModeSystem mode_system(const LatticeModel& m, const std::vector<EffectiveProbe>& eff, const std::vector<int>& which) {
  auto nm = normal_modes(m);
  ModeSystem ms;
  ms.P = static_cast<int>(which.size());
  const int n = m.n_sites;
  ms.w.resize(ms.P + n);
  ms.g = MatrixXd::Zero(ms.P, n);
  for (int i = 0; i < ms.P; ++i) {
    const auto& p = eff.at(which[i]).probe;
    ms.w[i] = p.gap;
    Eigen::Map<const VectorXd> v(p.profile.data(), n);
    ms.g.row(i) = p.lambda * (nm.profiles.transpose() * v).transpose();
    ms.sw.push_back(p.switching);
  }
  ms.w.tail(n) = nm.frequencies;
  return ms;
}

}  // namespace

Eigen::Matrix4d exact_probe_covariance(const LatticeModel& m, const std::vector<int>& coupled, int a, int b,
                                       const ExactOptions& o) {
  auto eff = effective_probes(m);
  if (!(o.dt > 0)) fail(Status::StepSize, "exact_probe_covariance: dt must be positive");
  auto ia = std::find(coupled.begin(), coupled.end(), a);
  auto ib = std::find(coupled.begin(), coupled.end(), b);
  if (ia == coupled.end() || ib == coupled.end() || a == b)
    fail(Status::InvalidArgument, "exact_probe_covariance: a and b must be distinct coupled probes");
  for (int c : coupled)
    if (c < 0 || c >= static_cast<int>(eff.size())) fail(Status::InvalidArgument, "probe index out of range");
  ModeSystem ms = mode_system(m, eff, coupled);
  const int P = ms.P, M = static_cast<int>(ms.w.size());
  const int n = M - P;

  double t0 = INFINITY, t1 = -INFINITY;
  for (const auto& s : ms.sw) {
    t0 = std::min(t0, s.center_time - o.window * s.T);
    t1 = std::max(t1, s.center_time + o.window * s.T);
  }
  double wmax = ms.w.maxCoeff();
  if (o.dt * wmax >= 0.5)
    fail(Status::StepSize, "exact_probe_covariance: dt*omega_max = " + std::to_string(o.dt * wmax) + " >= 0.5");

  const int pa = static_cast<int>(ia - coupled.begin()), pb = static_cast<int>(ib - coupled.begin());
  MatrixXd W = MatrixXd::Zero(4, 2 * M);
  W(0, 2 * pa) = 1.0;
  W(1, 2 * pa + 1) = 1.0;
  W(2, 2 * pb) = 1.0;
  W(3, 2 * pb + 1) = 1.0;

  VectorXd zeta(P);
  // dW/ds = -W U0(-s) A_C(s) U0(s)
  auto rhs = [&](double s, const MatrixXd& Wc) {
    for (int i = 0; i < P; ++i) {
      double u = (s - ms.sw[i].center_time) / ms.sw[i].T;
      zeta[i] = std::exp(-0.5 * M_PI * u * u);
    }
    MatrixXd Z = Wc;
    rotate_columns(Z, ms.w, -s);
    MatrixXd Y = MatrixXd::Zero(Wc.rows(), 2 * M);
    MatrixXd Zp(Wc.rows(), P), ZP(Wc.rows(), n);
    for (int i = 0; i < P; ++i) Zp.col(i) = Z.col(2 * i + 1);
    for (int j = 0; j < n; ++j) ZP.col(j) = Z.col(2 * (P + j) + 1);
    MatrixXd gz = zeta.asDiagonal() * ms.g;  // P × n
    MatrixXd toQ = -Zp * gz;                 // columns Q_j
    MatrixXd toq = -ZP * gz.transpose();     // columns q_I
    for (int i = 0; i < P; ++i) Y.col(2 * i) = toq.col(i);
    for (int j = 0; j < n; ++j) Y.col(2 * (P + j)) = toQ.col(j);
    rotate_columns(Y, ms.w, s);
    return MatrixXd(-Y);
  };

  long steps = static_cast<long>(std::ceil((t1 - t0) / o.dt));
  double h = -(t1 - t0) / steps;
  for (long k = 0; k < steps; ++k) {
    double s = t1 + k * h;
    MatrixXd k1 = rhs(s, W);
    MatrixXd k2 = rhs(s + 0.5 * h, W + 0.5 * h * k1);
    MatrixXd k3 = rhs(s + 0.5 * h, W + 0.5 * h * k2);
    MatrixXd k4 = rhs(s + h, W + h * k3);
    W += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  VectorXd s0(2 * M);
  for (int k = 0; k < M; ++k) {
    s0[2 * k] = 0.5 / ms.w[k];
    s0[2 * k + 1] = 0.5 * ms.w[k];
  }
  Eigen::Matrix4d sig = W * s0.asDiagonal() * W.transpose();
  Eigen::Vector4d sc(std::sqrt(ms.w[pa]), 1.0 / std::sqrt(ms.w[pa]), std::sqrt(ms.w[pb]),
                     1.0 / std::sqrt(ms.w[pb]));
  return sc.asDiagonal() * sig * sc.asDiagonal();
}

Eigen::Matrix4d exact_probe_covariance(const LatticeModel& m, int a, int b, const ExactOptions& o) {
  auto eff = effective_probes(m);
  std::vector<int> all(eff.size());
  for (size_t i = 0; i < eff.size(); ++i) all[i] = static_cast<int>(i);
  return exact_probe_covariance(m, all, a, b, o);
}

HarvestingResult perturbative_prediction(const LatticeModel& m, int a, int b) {
  auto eff = effective_probes(m);
  if (a < 0 || b < 0 || a >= static_cast<int>(eff.size()) || b >= static_cast<int>(eff.size()))
    fail(Status::InvalidArgument, "perturbative_prediction: probe index out of range");
  const auto& A = eff[a].probe;
  const auto& B = eff[b].probe;
  bool cross = a != b;
  if (cross && std::abs(A.gap - B.gap) > 1e-12 * std::max(A.gap, B.gap))
    fail(Status::GapMismatch, "perturbative_prediction: cross terms need equal gaps");
  if (cross && (A.switching.T != B.switching.T || A.switching.center_time != B.switching.center_time))
    fail(Status::InvalidArgument, "perturbative_prediction: cross terms need identical switching");
  ModeSystem ms = mode_system(m, eff, {a, b});
  const int n = m.n_sites;
  QuadratureSettings q;
  HarvestingResult r;
  for (int j = 0; j < n; ++j) {
    double wj = ms.w[2 + j];
    double ga = ms.g(0, j), gb = ms.g(1, j);
    double base = 1.0 / (2.0 * wj);
    double la = local_time_kernel(A.gap, wj, A.switching), lb = local_time_kernel(B.gap, wj, B.switching);
    cplx Ja = feynman_time_kernel(A.gap, wj, A.switching, q), Jb = feynman_time_kernel(B.gap, wj, B.switching, q);
    r.L_AA += base * ga * ga * la / (2.0 * A.gap);
    r.L_BB += base * gb * gb * lb / (2.0 * B.gap);
    r.K_A += base * ga * ga * Ja / (2.0 * A.gap);
    r.K_B += base * gb * gb * Jb / (2.0 * B.gap);
    r.L_AB += base * ga * gb * la / (2.0 * std::sqrt(A.gap * B.gap));
    r.M -= base * ga * gb * Ja / (2.0 * std::sqrt(A.gap * B.gap));
  }
  r.negativity = negativity_closed(r.L_AA, r.L_BB, r.M);
  return r;
}

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  if (x.size() != y.size()) fail(Status::InvalidArgument, "fit_loglog: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int k = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > floor) || !(x[i] > 0)) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++k;
  }
  if (k < 2) fail(Status::BelowNoise, "fit_loglog: fewer than two points above the noise floor");
  double den = k * sxx - sx * sx;
  if (!(std::abs(den) > 0)) fail(Status::BelowNoise, "fit_loglog: degenerate abscissae");
  return {(k * sxy - sx * sy) / den, k};
}

ScalingResult residual_scaling(const LatticeModel& base, const std::vector<double>& lambdas, const ExactOptions& o) {
  validate(base);
  if (lambdas.empty()) fail(Status::InvalidArgument, "residual_scaling: empty lambda grid");
  ScalingResult res;
  res.multimode = !base.chains.empty();
  auto eff0 = effective_probes(base);
  int a = 0, b = 1;
  std::vector<int> all(eff0.size());
  for (size_t i = 0; i < eff0.size(); ++i) all[i] = static_cast<int>(i);
  if (res.multimode) {
    if (base.chains.size() != 2) fail(Status::InvalidArgument, "residual_scaling: multimode runs need two chains");
    for (size_t i = 0; i < eff0.size(); ++i)
      if (eff0[i].group == 1 && eff0[i].mode == 0) b = static_cast<int>(i);
  } else if (base.probes.size() != 2) {
    fail(Status::InvalidArgument, "residual_scaling: needs exactly two probes");
  }
  std::vector<double> xs, rs, ms, cs;
  for (double lam : lambdas) {
    if (!(lam >= 0)) fail(Status::InvalidArgument, "residual_scaling: lambda must be >= 0");
    LatticeModel m = base;
    for (auto& p : m.probes) p.lambda = lam;
    for (auto& c : m.chains) c.lambda = lam;
    ScalingRow row;
    row.lambda = lam;
    auto pert = perturbative_prediction(m, a, b);
    row.n_pert = pert.negativity;
    Eigen::Matrix4d single = exact_probe_covariance(m, {a, b}, a, b, o);
    row.n_exact = gaussian_negativity(single);
    row.residual = std::abs(row.n_exact - row.n_pert);
    if (res.multimode) {
      Eigen::Matrix4d multi = exact_probe_covariance(m, all, a, b, o);
      row.n_multimode = gaussian_negativity(multi);
      row.cov_difference = (multi - single).norm();
    }
    res.rows.push_back(row);
    if (lam > 0) {
      xs.push_back(lam);
      rs.push_back(row.residual);
      ms.push_back(std::abs(row.n_multimode - row.n_pert));
      cs.push_back(row.cov_difference);
    }
  }
  auto f = fit_loglog(xs, rs);
  res.slope = f.slope;
  res.points_used = f.used;
  if (res.multimode) {
    auto fm = fit_loglog(xs, ms);
    res.multimode_slope = fm.slope;
    res.multimode_points = fm.used;
    auto fc = fit_loglog(xs, cs);
    res.cov_slope = fc.slope;
    res.cov_points = fc.used;
  }
  return res;
}

}  // namespace harvest
