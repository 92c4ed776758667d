#include "harvest/harvesting.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "harvest/errors.hpp"
#include "harvest/kernels.hpp"
#include "harvest/modes.hpp"
#include "harvest/smearing.hpp"

namespace harvest {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

double sinc(double y) {
  if (std::abs(y) < 1e-4) {
    double y2 = y * y;
    return 1.0 - y2 / 6.0 + y2 * y2 / 120.0;
  }
  return std::sin(y) / y;
}

struct Probe {
  PotentialKind kind;
  double scale;
  ModeIndex mode;
  double norm;  // (2Ω)^{-1/2}
  double gap;
  double diameter;
  double cutoff;
  bool radial;

  explicit Probe(const DetectorSpec& d) {
    validate(d);
    kind = d.potential.kind;
    scale = d.potential.scale;
    mode = d.mode;
    gap = detector_gap(d);
    norm = 1.0 / std::sqrt(2.0 * gap);
    radial = radially_symmetric(d);
    cutoff = fourier_cutoff(d);
    if (kind == PotentialKind::Box) {
      diameter = scale * std::sqrt(3.0);
    } else {
      int nmax = std::max({mode[0], mode[1], mode[2]});
      diameter = 2.0 * (std::sqrt(2.0 * nmax + 1.0) + 3.0) * scale;
    }
  }

  cplx axis(int i, double q) const {
    return kind == PotentialKind::Box ? box_axis_fourier(mode[i], scale, q)
                                      : harmonic_axis_fourier(mode[i], scale, q);
  }

  cplx eval(const Vec3& k) const { return norm * axis(0, k[0]) * axis(1, k[1]) * axis(2, k[2]); }

  double radial_value(double k) const {
    return norm * std::pow(4.0 * M_PI * scale * scale, 0.75) * std::exp(-0.5 * k * k * scale * scale);
  }

  bool same_shape(const Probe& o) const {
    return kind == o.kind && scale == o.scale && mode == o.mode && norm == o.norm;
  }
};

// Angular integrals ∫dΩ̂ of conj(F̃_I) F̃_J at fixed |k|.
struct Angular {
  cplx aa, bb, ab;
  double sd_aa = 0.0, sd_bb = 0.0, sd_ab = 0.0;
};

enum class AngularMode { Radial, ProductSymmetric, Product, MonteCarlo };

struct Geometry {
  Probe A, B;
  Vec3 sep;  // c_B - c_A
  double R;
  Vec3 e1, e2, e3;
  int axis3 = -1;  // coordinate axis along the separation, if any
  AngularMode mode;
  std::vector<Vec3> mc_dirs;

  Geometry(const DetectorSpec& dA, const DetectorSpec& dB, const QuadratureSettings& q) : A(dA), B(dB) {
    for (int i = 0; i < 3; ++i) sep[i] = dB.potential.center[i] - dA.potential.center[i];
    R = std::sqrt(sep[0] * sep[0] + sep[1] * sep[1] + sep[2] * sep[2]);
    if (R > 0) {
      e3 = {sep[0] / R, sep[1] / R, sep[2] / R};
    } else {
      e3 = {0.0, 0.0, 1.0};
    }
    int nonzero = 0;
    for (int i = 0; i < 3; ++i)
      if (sep[i] != 0.0) ++nonzero, axis3 = i;
    if (nonzero == 0) axis3 = 2;
    if (nonzero > 1) axis3 = -1;
    // e1, e2 complete a right-handed frame; coordinate axes when possible.
    if (axis3 >= 0) {
      e3 = {0.0, 0.0, 0.0};
      e3[axis3] = 1.0;
      e1 = {0.0, 0.0, 0.0};
      e2 = {0.0, 0.0, 0.0};
      e1[(axis3 + 1) % 3] = 1.0;
      e2[(axis3 + 2) % 3] = 1.0;
    } else {
      Vec3 t = std::abs(e3[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
      double dot = t[0] * e3[0] + t[1] * e3[1] + t[2] * e3[2];
      for (int i = 0; i < 3; ++i) e1[i] = t[i] - dot * e3[i];
      double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
      for (double& v : e1) v /= n1;
      e2 = {e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2], e3[0] * e1[1] - e3[1] * e1[0]};
    }

    if (q.method == QuadMethod::MonteCarlo) {
      mode = AngularMode::MonteCarlo;
      std::mt19937_64 rng(q.mc_seed);
      std::normal_distribution<double> nd;
      mc_dirs.resize(q.mc_samples);
      for (auto& u : mc_dirs) {
        double x = nd(rng), y = nd(rng), z = nd(rng);
        double n = std::sqrt(x * x + y * y + z * z);
        u = {x / n, y / n, z / n};
      }
    } else if (q.method == QuadMethod::AdaptiveGK && A.radial && B.radial) {
      mode = AngularMode::Radial;
    } else if (A.same_shape(B) && axis3 >= 0) {
      mode = AngularMode::ProductSymmetric;
    } else {
      mode = AngularMode::Product;
    }
  }

  double diameter() const { return std::max(A.diameter, B.diameter); }
  double cutoff() const { return std::max(A.cutoff, B.cutoff); }

  int theta_order(double k) const {
    return std::min(4096, 24 + static_cast<int>(std::ceil(0.75 * k * (R + diameter()))));
  }
  int phi_order(double k) const {
    int n = 16 + static_cast<int>(std::ceil(1.5 * k * diameter()));
    n = (n + 3) / 4 * 4;
    return std::min(4096, n);
  }

  Vec3 direction(double x, double s, double phi) const {
    double c = std::cos(phi) * s, sn = std::sin(phi) * s;
    return {c * e1[0] + sn * e2[0] + x * e3[0], c * e1[1] + sn * e2[1] + x * e3[1],
            c * e1[2] + sn * e2[2] + x * e3[2]};
  }

  Angular angular(double k) const {
    Angular a;
    switch (mode) {
      case AngularMode::Radial: {
        double fa = A.radial_value(k), fb = B.radial_value(k);
        a.aa = kFourPi * fa * fa;
        a.bb = kFourPi * fb * fb;
        a.ab = kFourPi * fa * fb * sinc(k * R);
        return a;
      }
      case AngularMode::ProductSymmetric: {
        // |F̃|² is even in every coordinate: integrate x=cosθ on [0,1] and
        // φ on [0,π/2], weight 8.
        const auto& g = gauss_legendre((theta_order(k) + 1) / 2 + 4);
        int nphi = phi_order(k) / 4;
        double hphi = 0.5 * M_PI / nphi;
        double saa = 0.0, sab = 0.0;
        for (size_t it = 0; it < g.x.size(); ++it) {
          double x = 0.5 * (g.x[it] + 1.0), wx = 0.5 * g.w[it];
          double s = std::sqrt(std::max(0.0, 1.0 - x * x));
          cplx fx = A.axis(axis3, k * x);
          double fx2 = std::norm(fx) * A.norm * A.norm;
          int i1 = (axis3 + 1) % 3, i2 = (axis3 + 2) % 3;
          double row = 0.0;
          for (int j = 0; j <= nphi; ++j) {
            double phi = j * hphi;
            double w = (j == 0 || j == nphi) ? 0.5 : 1.0;
            row += w * std::norm(A.axis(i1, k * s * std::cos(phi))) * std::norm(A.axis(i2, k * s * std::sin(phi)));
          }
          row *= hphi * fx2;
          saa += wx * row;
          sab += wx * row * std::cos(k * x * R);
        }
        a.aa = a.bb = 8.0 * saa;
        a.ab = 8.0 * sab;
        return a;
      }
      case AngularMode::Product: {
        const auto& g = gauss_legendre(theta_order(k));
        int nphi = phi_order(k);
        double hphi = 2.0 * M_PI / nphi;
        bool same = A.same_shape(B);
        cplx saa = 0.0, sbb = 0.0, sab = 0.0;
        for (size_t it = 0; it < g.x.size(); ++it) {
          double x = g.x[it];
          double s = std::sqrt(std::max(0.0, 1.0 - x * x));
          cplx phase = std::polar(1.0, -k * x * R);
          cplx raa = 0.0, rbb = 0.0, rab = 0.0;
          for (int j = 0; j < nphi; ++j) {
            Vec3 u = direction(x, s, j * hphi);
            Vec3 kv{k * u[0], k * u[1], k * u[2]};
            cplx fa = A.eval(kv);
            cplx fb = same ? fa : B.eval(kv);
            raa += std::norm(fa);
            rbb += std::norm(fb);
            rab += std::conj(fa) * fb;
          }
          saa += g.w[it] * raa;
          sbb += g.w[it] * rbb;
          sab += g.w[it] * rab * phase;
        }
        a.aa = saa * hphi;
        a.bb = sbb * hphi;
        a.ab = sab * hphi;
        return a;
      }
      case AngularMode::MonteCarlo: {
        double n = static_cast<double>(mc_dirs.size());
        cplx m_aa = 0.0, m_bb = 0.0, m_ab = 0.0;
        double v_aa = 0.0, v_bb = 0.0, v_ab = 0.0;
        for (const auto& u : mc_dirs) {
          Vec3 kv{k * u[0], k * u[1], k * u[2]};
          double kr = kv[0] * sep[0] + kv[1] * sep[1] + kv[2] * sep[2];
          cplx fa = A.eval(kv), fb = B.eval(kv);
          cplx ab = std::conj(fa) * fb * std::polar(1.0, -kr);
          m_aa += std::norm(fa);
          m_bb += std::norm(fb);
          m_ab += ab;
          v_aa += std::norm(fa) * std::norm(fa);
          v_bb += std::norm(fb) * std::norm(fb);
          v_ab += std::norm(ab);
        }
        m_aa /= n;
        m_bb /= n;
        m_ab /= n;
        auto sd = [&](double v2, cplx m) { return kFourPi * std::sqrt(std::max(0.0, v2 / n - std::norm(m)) / n); };
        a.sd_aa = sd(v_aa, m_aa);
        a.sd_bb = sd(v_bb, m_bb);
        a.sd_ab = sd(v_ab, m_ab);
        a.aa = kFourPi * m_aa;
        a.bb = kFourPi * m_bb;
        a.ab = kFourPi * m_ab;
        return a;
      }
    }
    return a;
  }
};

bool same_switching(const SwitchingSpec& a, const SwitchingSpec& b) {
  return a.T == b.T && a.center_time == b.center_time;
}

void check_pair(const DetectorSpec& dA, const DetectorSpec& dB) {
  double ga = detector_gap(dA), gb = detector_gap(dB);
  if (std::abs(ga - gb) > 1e-12 * std::max(ga, gb))
    fail(Status::GapMismatch, "cross terms need equal gaps (got " + std::to_string(ga) + " and " +
                                  std::to_string(gb) + ")");
  if (!same_switching(dA.switching, dB.switching))
    fail(Status::InvalidArgument, "cross terms need identical switching (T and center_time)");
}

enum Comp { cLAA = 0, cLBB, cLAB, cKA, cKB, cM, cCOMM, kNComp };

}  // namespace

HarvestingResult harvest(const DetectorSpec& dA, const DetectorSpec& dB, const TargetFieldSpec& f,
                         const QuadratureSettings& q) {
  validate(q);
  validate(f);
  check_pair(dA, dB);
  const Geometry geo(dA, dB, q);
  const double m = f.mass;
  const double OmA = geo.A.gap, OmB = geo.B.gap;
  const double TA = dA.switching.T, TB = dB.switching.T;
  const double la = dA.lambda, lb = dB.lambda;
  const double measure = 1.0 / (8.0 * M_PI * M_PI * M_PI);

  auto local = [](double w, double T) { return 2.0 * T * T * std::exp(-w * w * T * T / M_PI); };

  VecIntegrand integrand = [&](double k, cplx* o) {
    double w = std::sqrt(k * k + m * m);
    double pref = measure * k * k / (2.0 * w);
    Angular a = geo.angular(k);
    cplx JA = feynman_time_kernel(OmA, w, dA.switching, q);
    cplx JB = feynman_time_kernel(OmB, w, dB.switching, q);
    cplx JsA = symmetric_time_kernel(OmA, w, dA.switching);
    o[cLAA] = la * la * pref * local(OmA + w, TA) * a.aa;
    o[cLBB] = lb * lb * pref * local(OmB + w, TB) * a.bb;
    o[cLAB] = la * lb * pref * local(OmA + w, TA) * a.ab;
    o[cKA] = la * la * pref * JA * a.aa;
    o[cKB] = lb * lb * pref * JB * a.bb;
    o[cM] = -la * lb * pref * JA * a.ab;
    o[cCOMM] = la * lb * pref * (JA - JsA) * a.ab;
  };

  VectorQuadSpec spec;
  spec.ncomp = kNComp;
  spec.ref_of.assign(kNComp, -1);
  spec.ref_pair.assign(kNComp, {0, 0});
  spec.ref_of[cLAB] = -2;
  spec.ref_pair[cLAB] = {cLAA, cLBB};
  spec.ref_of[cCOMM] = cM;
  const double kc = geo.cutoff();
  const double Tmax = std::max(TA, TB);
  double panels = 8.0 + std::ceil(kc * (geo.R + geo.diameter()) / (4.0 * M_PI)) + std::ceil(kc * Tmax / 4.0);
  spec.initial_panels = static_cast<int>(std::min(panels, 4000.0));

  auto r = integrate_vector(integrand, 0.0, kc, spec, q);

  HarvestingResult h;
  h.L_AA = r.value[cLAA].real();
  h.L_BB = r.value[cLBB].real();
  h.L_AB = r.value[cLAB];
  h.K_A = r.value[cKA];
  h.K_B = r.value[cKB];
  h.M = r.value[cM];
  h.comm_estimate = std::abs(r.value[cCOMM]);
  h.comm_ratio = std::abs(h.M) > 0 ? h.comm_estimate / std::abs(h.M) : 0.0;
  h.err_L_AA = r.error[cLAA];
  h.err_L_BB = r.error[cLBB];
  h.err_L_AB = r.error[cLAB];
  h.err_K_A = r.error[cKA];
  h.err_K_B = r.error[cKB];
  h.err_M = r.error[cM];
  h.err_comm = r.error[cCOMM];
  h.converged = r.converged;
  h.worst_ratio = r.worst_ratio;
  h.evaluations = r.evaluations;

  if (geo.mode == AngularMode::MonteCarlo) {
    // Angular sampling error, propagated through the radial integral.
    QuadratureSettings loose = q;
    loose.rel_tol = 1e-3;
    // Only an error bar: one refinement pass over the initial panels is plenty.
    loose.max_evaluations = 2L * 15 * spec.initial_panels;
    VectorQuadSpec s2;
    s2.ncomp = 3;
    s2.initial_panels = spec.initial_panels;
    auto e = integrate_vector(
        [&](double k, cplx* o) {
          double w = std::sqrt(k * k + m * m);
          double pref = measure * k * k / (2.0 * w);
          Angular a = geo.angular(k);
          double lk = local(OmA + w, TA);
          double jk = std::abs(feynman_time_kernel(OmA, w, dA.switching, q));
          o[0] = la * la * pref * (lk + jk) * a.sd_aa;
          o[1] = lb * lb * pref * (lk + jk) * a.sd_bb;
          o[2] = la * lb * pref * (lk + jk) * a.sd_ab;
        },
        0.0, kc, s2, loose);
    double eaa = e.value[0].real(), ebb = e.value[1].real(), eab = e.value[2].real();
    h.err_L_AA += eaa;
    h.err_K_A += eaa;
    h.err_L_BB += ebb;
    h.err_K_B += ebb;
    h.err_L_AB += eab;
    h.err_M += eab;
    h.err_comm += eab;
    double tgt = std::max(q.abs_tol, q.rel_tol * std::max({h.L_AA, h.L_BB, std::abs(h.M)}));
    if (std::max({eaa, ebb, eab}) > tgt) h.converged = false;
    h.worst_ratio = std::max(h.worst_ratio, std::max({eaa, ebb, eab}) / tgt);
  }

  h.negativity = negativity_closed(std::max(0.0, h.L_AA), std::max(0.0, h.L_BB), h.M);
  return h;
}

namespace {

void require(const HarvestingResult& h, const char* what) {
  if (!h.converged)
    fail(Status::ToleranceNotMet, std::string(what) + ": quadrature did not reach the requested tolerance",
         h.worst_ratio);
}

}  // namespace

QuadResult<cplx> compute_L(const DetectorSpec& dI, const DetectorSpec& dJ, const TargetFieldSpec& f,
                           const QuadratureSettings& q) {
  auto h = harvest(dI, dJ, f, q);
  require(h, "compute_L");
  bool self = &dI == &dJ;
  if (!self) {
    // Identical specs behave as I = J.
    self = dI.potential.kind == dJ.potential.kind && dI.potential.scale == dJ.potential.scale &&
           dI.potential.center == dJ.potential.center && dI.mode == dJ.mode && dI.lambda == dJ.lambda &&
           detector_gap(dI) == detector_gap(dJ) && same_switching(dI.switching, dJ.switching) &&
           dI.potential.probe_mass == dJ.potential.probe_mass;
  }
  if (self) return {cplx(h.L_AA, 0.0), h.err_L_AA, h.evaluations, true};
  return {h.L_AB, h.err_L_AB, h.evaluations, true};
}

QuadResult<cplx> compute_M(const DetectorSpec& dA, const DetectorSpec& dB, const TargetFieldSpec& f,
                           const QuadratureSettings& q) {
  auto h = harvest(dA, dB, f, q);
  require(h, "compute_M");
  return {h.M, h.err_M, h.evaluations, true};
}

QuadResult<cplx> compute_K(const DetectorSpec& d, const TargetFieldSpec& f, const QuadratureSettings& q) {
  auto h = harvest(d, d, f, q);
  require(h, "compute_K");
  return {h.K_A, h.err_K_A, h.evaluations, true};
}

CommEstimate communication_estimate(const DetectorSpec& dA, const DetectorSpec& dB,
                                    const TargetFieldSpec& f, const QuadratureSettings& q) {
  auto h = harvest(dA, dB, f, q);
  require(h, "communication_estimate");
  return {h.comm_estimate, h.comm_ratio, h.err_comm};
}

DetectorPairState assemble_rho(const HarvestingResult& r) {
  auto finite = [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); };
  if (!std::isfinite(r.L_AA) || !std::isfinite(r.L_BB) || !finite(r.L_AB) || !finite(r.K_A) ||
      !finite(r.K_B) || !finite(r.M))
    fail(Status::InconsistentInput, "assemble_rho: non-finite scalar");
  DetectorPairState s;
  auto& p = s.rho;
  // 0-based: 00=0, 01=1, 02=2, 10=3, 11=4, 20=6
  p(0, 0) = 1.0 - r.L_AA - r.L_BB;
  p(1, 1) = r.L_BB;
  p(3, 3) = r.L_AA;
  p(1, 3) = std::conj(r.L_AB);
  p(0, 2) = std::conj(r.K_B);
  p(0, 6) = std::conj(r.K_A);
  p(0, 4) = std::conj(r.M);
  for (int i = 0; i < 9; ++i)
    for (int j = i + 1; j < 9; ++j)
      if (p(i, j) != cplx(0.0)) p(j, i) = std::conj(p(i, j));
  double tr = 0.0;
  for (int i = 0; i < 9; ++i) tr += p(i, i).real();
  if (std::abs(tr - 1.0) > 1e-9) fail(Status::InconsistentInput, "assemble_rho: trace deviates from 1");
  return s;
}

DetectorState single_detector_state(double L, cplx K) {
  if (!std::isfinite(L) || !std::isfinite(K.real()) || !std::isfinite(K.imag()))
    fail(Status::InconsistentInput, "single_detector_state: non-finite scalar");
  DetectorState s;
  s.rho(0, 0) = 1.0 - L;
  s.rho(1, 1) = L;
  s.rho(0, 2) = std::conj(K);
  s.rho(2, 0) = K;
  return s;
}

double negativity_closed(double L_AA, double L_BB, cplx M) {
  if (!(L_AA >= 0) || !(L_BB >= 0)) fail(Status::Domain, "negativity_closed: L must be >= 0");
  double half = 0.5 * (L_AA - L_BB);
  double disc = std::norm(M) - half * half;
  if (disc < 0) return 0.0;
  return std::max(0.0, std::sqrt(disc) - 0.5 * (L_AA + L_BB));
}

Eigen::Matrix<cplx, 9, 9> partial_transpose_B(const Eigen::Matrix<cplx, 9, 9>& m) {
  Eigen::Matrix<cplx, 9, 9> t;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) t(3 * a + b, 3 * c + d) = m(3 * a + d, 3 * c + b);
  return t;
}

double negativity_from_rho(const DetectorPairState& s) {
  Eigen::Matrix<cplx, 9, 9> pt = partial_transpose_B(s.rho);
  Eigen::Matrix<cplx, 9, 9> h = 0.5 * (pt + pt.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, 9, 9>> es(h, Eigen::EigenvaluesOnly);
  double n = 0.0;
  for (int i = 0; i < 9; ++i)
    if (es.eigenvalues()(i) < 0) n -= es.eigenvalues()(i);
  return n;
}

}  // namespace harvest
