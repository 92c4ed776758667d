#include "acceptance/brute_force.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <map>

namespace bf {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
using Vec = std::array<double, 3>;

constexpr double kPi = 3.14159265358979323846;

cplx box_axis(int n, double d, double q) {
  double a = n * kPi / d;
  if (std::abs(std::abs(q) - a) < 1e-5 * a) {
    auto re = [&](double u) { return std::sin(a * u) * std::cos(q * u); };
    auto im = [&](double u) { return -std::sin(a * u) * std::sin(q * u); };
    return std::sqrt(2.0 / d) * cplx(GK::integrate(re, 0.0, d, 10, 1e-14), GK::integrate(im, 0.0, d, 10, 1e-14));
  }
  double sign = n % 2 ? -1.0 : 1.0;
  return std::sqrt(2.0 / d) * a * (1.0 - sign * std::polar(1.0, -q * d)) / (a * a - q * q);
}

// |∫_0^d sqrt(2/d) sin(au) e^{-iqu} du|², a = nπ/d, rewritten with
// sin((a-|q|)d/2) so the removable pole at |q| = a needs no special case.
double box_power(int n, double d, double q) {
  double a = n * kPi / d, x = std::abs(q);
  double h = 0.5 * (a - x) * d;
  double sinc = std::abs(h) < 1e-6 ? 1.0 - h * h / 6.0 : std::sin(h) / h;
  return 2.0 * d * a * a * sinc * sinc / ((a + x) * (a + x));
}

// ∫ d³x Φ(x) e^{-ik·x} with Φ including (2Ω)^{-1/2}.
cplx transform(const Detector& det, const Vec& k) {
  cplx v = 1.0 / std::sqrt(2.0 * det.gap);
  double phase = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (det.box) {
      v *= box_axis(det.mode[i], det.scale, k[i]);
    } else {
      // ground-state Gaussian only
      double l = det.scale;
      v *= std::pow(4.0 * kPi * l * l, 0.25) * std::exp(-0.5 * k[i] * k[i] * l * l);
    }
    phase += k[i] * det.center[i];
  }
  return v * std::polar(1.0, -phase);
}

struct Frame {
  Vec e1, e2, e3;
};

Frame frame_along(const Vec& s) {
  double n = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
  Vec e3 = n > 0 ? Vec{s[0] / n, s[1] / n, s[2] / n} : Vec{0, 0, 1};
  Vec t = std::abs(e3[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
  double dot = t[0] * e3[0] + t[1] * e3[1] + t[2] * e3[2];
  Vec e1{t[0] - dot * e3[0], t[1] - dot * e3[1], t[2] - dot * e3[2]};
  double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
  for (double& x : e1) x /= n1;
  Vec e2{e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2], e3[0] * e1[1] - e3[1] * e1[0]};
  return {e1, e2, e3};
}

struct Angular {
  double aa, bb;
  cplx ab;
};

}  // namespace

cplx time_ordered(double Omega, double omega, double T) {
  // Ooura's double-exponential rules for the half-line Fourier integrals;
  // the node tables are built once.
  static boost::math::quadrature::ooura_fourier_sin<double> fsin;
  static boost::math::quadrature::ooura_fourier_cos<double> fcos;
  const double a = kPi / (4.0 * T * T);
  auto g = [&](double v) { return std::exp(-a * v * v); };
  double re = fcos.integrate(g, omega).first, im = -fsin.integrate(g, omega).first;
  return 2.0 * T * std::exp(-Omega * Omega * T * T / kPi) * cplx(re, im);
}

Values integrate(const Detector& A, const Detector& B, double mass, double cutoff, double tol) {
  const double T = 1.0, Om = A.gap;
  Vec sep{B.center[0] - A.center[0], B.center[1] - A.center[1], B.center[2] - A.center[2]};
  const Frame fr = frame_along(sep);
  const double sep_len = std::sqrt(sep[0] * sep[0] + sep[1] * sep[1] + sep[2] * sep[2]);
  const bool same_shape = A.box == B.box && A.scale == B.scale && A.mode == B.mode && A.gap == B.gap;
  const double measure = 1.0 / std::pow(2.0 * kPi, 3);

  // Identical boxes offset along one coordinate axis: the product of axis
  // powers is even in each component, so with the polar axis along the
  // offset the φ integral depends on k only through k·sinθ.
  int axis = -1;
  if (same_shape && A.box) {
    int nonzero = 0;
    for (int i = 0; i < 3; ++i)
      if (sep[i] != 0.0) {
        axis = i;
        ++nonzero;
      }
    if (nonzero != 1) axis = -1;
  }
  auto aligned = [&](double k, bool need_ab, double atol) -> Angular {
    const int t1 = (axis + 1) % 3, t2 = (axis + 2) % 3;
    const double d = A.scale;
    auto Q = [&](double rho) {
      auto f = [&](double ph) {
        return box_power(A.mode[t1], d, rho * std::cos(ph)) * box_power(A.mode[t2], d, rho * std::sin(ph));
      };
      int np = 2 + static_cast<int>(rho * d / 4.0);
      double s = 0.0;
      for (int i = 0; i < np; ++i) s += GK::integrate(f, 0.5 * kPi * i / np, 0.5 * kPi * (i + 1) / np, 10, atol);
      return 4.0 * s;
    };
    auto g = [&](double th) {
      double c = std::cos(th);
      double base = std::sin(th) * box_power(A.mode[axis], d, k * c) * Q(k * std::sin(th));
      return cplx(base, need_ab ? base * std::cos(k * sep_len * c) : 0.0);
    };
    int nt = 2 + static_cast<int>(k * d / 4.0) + (need_ab ? static_cast<int>(k * sep_len / (2.0 * kPi)) : 0);
    cplx s = 0.0;
    for (int i = 0; i < nt; ++i) s += GK::integrate(g, 0.5 * kPi * i / nt, 0.5 * kPi * (i + 1) / nt, 10, atol);
    // Upper hemisphere doubled; (2Ω)^{-1/2} from each profile.
    double norm = 2.0 / (2.0 * A.gap);
    return {norm * s.real(), norm * s.real(), need_ab ? cplx(norm * s.imag()) : cplx(norm * s.real())};
  };

  std::map<double, Angular> memo;
  auto angular = [&](double k, bool need_ab, double atol) -> Angular {
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    if (axis >= 0) {
      Angular r = aligned(k, need_ab, atol);
      if (need_ab) memo[k] = r;
      return r;
    }
    auto dir = [&](double th, double ph) {
      double s = std::sin(th), c = std::cos(th);
      Vec u;
      for (int i = 0; i < 3; ++i) u[i] = k * (s * std::cos(ph) * fr.e1[i] + s * std::sin(ph) * fr.e2[i] + c * fr.e3[i]);
      return u;
    };
    // The Gaussian ground state is isotropic, so its φ integral is 2π times
    // the integrand. θ is split by the phase k·|sep|·cosθ.
    const bool isotropic = !A.box && !B.box;
    auto over_sphere = [&](auto g, bool oscillates) {
      auto theta_part = [&](double th) {
        auto inner = [&](double ph) { return g(dir(th, ph)); };
        if (isotropic) return std::sin(th) * 2 * kPi * inner(0.0);
        int np = 4 + static_cast<int>(2.0 * k * (A.scale + B.scale) / kPi);
        decltype(inner(0.0)) s{};
        for (int i = 0; i < np; ++i) s += GK::integrate(inner, 2 * kPi * i / np, 2 * kPi * (i + 1) / np, 15, atol);
        return std::sin(th) * s;
      };
      int nt = 1 + (oscillates ? static_cast<int>(k * sep_len / kPi) : 0);
      decltype(theta_part(0.0)) s{};
      for (int i = 0; i < nt; ++i) s += GK::integrate(theta_part, kPi * i / nt, kPi * (i + 1) / nt, 15, atol);
      return s;
    };
    Angular r;
    r.aa = over_sphere([&](const Vec& kv) { return std::norm(transform(A, kv)); }, false);
    // Identical detectors: F_B = F_A e^{-ik·sep}, so BB = AA.
    r.bb = same_shape ? r.aa : over_sphere([&](const Vec& kv) { return std::norm(transform(B, kv)); }, false);
    r.ab = need_ab ? over_sphere([&](const Vec& kv) { return std::conj(transform(A, kv)) * transform(B, kv); }, true)
                   : cplx(std::sqrt(r.aa * r.bb));
    if (need_ab) memo[k] = r;
    return r;
  };

  auto omega = [&](double k) { return std::sqrt(k * k + mass * mass); };
  auto local = [&](double w) { return 2.0 * T * T * std::exp(-(Om + w) * (Om + w) * T * T / kPi); };

  // Outer panels of a few units of k keep the adaptive splitting shallow.
  auto outer = [&](auto g) {
    int np = 8 + static_cast<int>(cutoff / 4.0);
    decltype(g(1.0)) s{};
    for (int i = 0; i < np; ++i) s += GK::integrate(g, cutoff * i / np, cutoff * (i + 1) / np, 15, tol);
    return s;
  };

  Values v;
  v.L_AA = outer([&](double k) {
    double w = omega(k);
    return measure * k * k / (2.0 * w) * local(w) * angular(k, true, tol).aa;
  });
  v.L_AB = outer([&](double k) {
    double w = omega(k);
    return measure * k * k / (2.0 * w) * local(w) * angular(k, true, tol).ab;
  });
  v.M = outer([&](double k) {
    double w = omega(k);
    return -measure * k * k / (2.0 * w) * time_ordered(Om, w, T) * angular(k, true, tol).ab;
  });

  // Truncation estimate: ∫_K^{2K} of the integrand magnitudes with the
  // actual cross term. Past 2K the integrands fall off as a power of k.
  auto tail_L = [&](double k) {
    double w = omega(k);
    return measure * k * k / (2.0 * w) * local(w) * std::abs(angular(k, true, 1e-4).ab);
  };
  auto tail_M = [&](double k) {
    double w = omega(k);
    return measure * k * k / (2.0 * w) * std::abs(time_ordered(Om, w, T)) * std::abs(angular(k, true, 1e-4).ab);
  };
  v.tail_L = v.tail_M = 0.0;
  for (int i = 0; i < 2; ++i) {
    double a = cutoff * (1.0 + 0.5 * i), b = cutoff * (1.5 + 0.5 * i);
    v.tail_L += GK::integrate(tail_L, a, b, 1, 1e-1);
    v.tail_M += GK::integrate(tail_M, a, b, 1, 1e-1);
  }
  return v;
}

}  // namespace bf
