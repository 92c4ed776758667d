#include "harvest/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <queue>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

// G7K15 abscissae on [0,1] half of [-1,1], from the largest down to the centre.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for xgk[1], xgk[3], xgk[5], xgk[7].
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double eps = std::numeric_limits<double>::epsilon();

struct Panel {
  double a, b;
  std::vector<cplx> val;
  std::vector<double> err, absint;
};

void gk15(const VecIntegrand& f, int n, Panel& p, std::vector<cplx>& fv) {
  const double c = 0.5 * (p.a + p.b), h = 0.5 * (p.b - p.a);
  fv.resize(15 * n);
  f(c, &fv[0]);
  for (int j = 0; j < 7; ++j) {
    double dx = h * xgk[j];
    f(c - dx, &fv[(1 + 2 * j) * n]);
    f(c + dx, &fv[(2 + 2 * j) * n]);
  }
  p.val.assign(n, 0.0);
  p.err.assign(n, 0.0);
  p.absint.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    cplx fc = fv[i];
    cplx rk = fc * wgk[7];
    cplx rg = fc * wg[3];
    double ra = std::abs(fc) * wgk[7];
    for (int j = 0; j < 7; ++j) {
      cplx f1 = fv[(1 + 2 * j) * n + i], f2 = fv[(2 + 2 * j) * n + i];
      rk += wgk[j] * (f1 + f2);
      ra += wgk[j] * (std::abs(f1) + std::abs(f2));
      if (j % 2 == 1) rg += wg[j / 2] * (f1 + f2);
    }
    cplx mean = 0.5 * rk;
    double rasc = wgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
      rasc += wgk[j] * (std::abs(fv[(1 + 2 * j) * n + i] - mean) +
                        std::abs(fv[(2 + 2 * j) * n + i] - mean));
    double e = std::abs((rk - rg) * h);
    rasc *= std::abs(h);
    ra *= std::abs(h);
    if (rasc != 0.0 && e != 0.0) e = rasc * std::min(1.0, std::pow(200.0 * e / rasc, 1.5));
    if (ra > std::numeric_limits<double>::min() / (50 * eps)) e = std::max(50 * eps * ra, e);
    p.val[i] = rk * h;
    p.err[i] = e;
    p.absint[i] = ra;
  }
}

}  // namespace

void validate(const QuadratureSettings& q) {
  if (!(q.rel_tol > 0) || !(q.abs_tol > 0))
    fail(Status::InvalidArgument, "quadrature: tolerances must be positive");
  if (q.max_evaluations <= 0) fail(Status::InvalidArgument, "quadrature: max_evaluations must be positive");
  if (q.method == QuadMethod::MonteCarlo && q.mc_samples < 16)
    fail(Status::InvalidArgument, "quadrature: mc_samples must be >= 16");
}

const char* method_name(QuadMethod m) {
  switch (m) {
    case QuadMethod::AdaptiveGK: return "adaptive_gk";
    case QuadMethod::TensorGL: return "tensor_gl";
    case QuadMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

QuadMethod method_from_name(const std::string& s) {
  if (s == "adaptive_gk") return QuadMethod::AdaptiveGK;
  if (s == "tensor_gl") return QuadMethod::TensorGL;
  if (s == "monte_carlo") return QuadMethod::MonteCarlo;
  fail(Status::InvalidArgument, "unknown quadrature method '" + s + "'");
}

VectorQuadResult integrate_vector(const VecIntegrand& f, double a, double b,
                                  const VectorQuadSpec& spec, const QuadratureSettings& q) {
  validate(q);
  const int n = spec.ncomp;
  if (n < 1) fail(Status::InvalidArgument, "integrate_vector: ncomp < 1");
  if (!(b > a)) fail(Status::InvalidArgument, "integrate_vector: empty interval");

  std::vector<Panel> panels;
  std::vector<cplx> buf;
  int np = std::max(1, spec.initial_panels);
  for (int i = 0; i < np; ++i) {
    Panel p;
    p.a = a + (b - a) * i / np;
    p.b = (i + 1 == np) ? b : a + (b - a) * (i + 1) / np;
    gk15(f, n, p, buf);
    panels.push_back(std::move(p));
  }
  long evals = 15L * np;

  VectorQuadResult r;
  r.value.assign(n, 0.0);
  r.error.assign(n, 0.0);
  r.abs_integral.assign(n, 0.0);
  std::vector<double> target(n), heap_target(n);

  auto add = [&](const Panel& p, double sign) {
    for (int i = 0; i < n; ++i) {
      r.value[i] += sign * p.val[i];
      r.error[i] += sign * p.err[i];
      r.abs_integral[i] += sign * p.absint[i];
    }
  };
  auto resum = [&] {
    std::fill(r.value.begin(), r.value.end(), cplx(0.0));
    std::fill(r.error.begin(), r.error.end(), 0.0);
    std::fill(r.abs_integral.begin(), r.abs_integral.end(), 0.0);
    for (const auto& p : panels) add(p, 1.0);
  };
  auto retarget = [&] {
    r.worst_ratio = 0.0;
    for (int i = 0; i < n; ++i) {
      double ref = std::abs(r.value[i]);
      int ro = spec.ref_of.empty() ? -1 : spec.ref_of[i];
      if (ro >= 0) ref = std::abs(r.value[ro]);
      if (ro == -2) {
        auto [j, k] = spec.ref_pair[i];
        ref = std::sqrt(std::abs(r.value[j]) * std::abs(r.value[k]));
      }
      // Twice the per-panel roundoff floor, so roundoff-limited sums can pass.
      target[i] = std::max({q.abs_tol, q.rel_tol * ref, 100 * eps * r.abs_integral[i]});
      r.worst_ratio = std::max(r.worst_ratio, std::max(r.error[i], 0.0) / target[i]);
    }
  };
  auto score = [&](const Panel& p) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s = std::max(s, p.err[i] / heap_target[i]);
    return s;
  };

  using Entry = std::pair<double, size_t>;
  std::priority_queue<Entry> heap;
  auto rebuild = [&] {
    heap_target = target;
    std::vector<Entry> e;
    e.reserve(panels.size());
    for (size_t j = 0; j < panels.size(); ++j) e.emplace_back(score(panels[j]), j);
    heap = std::priority_queue<Entry>(std::less<Entry>(), std::move(e));
  };

  resum();
  retarget();
  rebuild();
  const size_t max_panels = 200000;
  long since_resum = 0;
  while (r.worst_ratio > 1.0) {
    if (evals + 30 > q.max_evaluations || panels.size() >= max_panels) {
      r.converged = false;
      break;
    }
    size_t worst = heap.top().second;
    heap.pop();
    Panel left, right;
    double mid = 0.5 * (panels[worst].a + panels[worst].b);
    if (!(mid > panels[worst].a && mid < panels[worst].b)) {
      r.converged = false;
      break;
    }
    left.a = panels[worst].a;
    left.b = mid;
    right.a = mid;
    right.b = panels[worst].b;
    gk15(f, n, left, buf);
    gk15(f, n, right, buf);
    evals += 30;
    add(panels[worst], -1.0);
    add(left, 1.0);
    add(right, 1.0);
    panels[worst] = std::move(left);
    panels.push_back(std::move(right));
    if (++since_resum >= 256) {
      resum();
      since_resum = 0;
    }
    retarget();
    bool stale = false;
    for (int i = 0; i < n; ++i)
      if (target[i] > 2.0 * heap_target[i] || target[i] < 0.5 * heap_target[i]) stale = true;
    if (stale) {
      rebuild();
    } else {
      heap.emplace(score(panels[worst]), worst);
      heap.emplace(score(panels.back()), panels.size() - 1);
    }
  }
  // Final sums in interval order.
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  resum();
  retarget();
  if (r.worst_ratio > 1.0) r.converged = false;
  r.evaluations = evals;
  return r;
}

QuadResult<double> integrate(const std::function<double(double)>& f, double a, double b,
                             const QuadratureSettings& q) {
  VectorQuadSpec s;
  auto v = integrate_vector([&](double x, cplx* o) { o[0] = f(x); }, a, b, s, q);
  return {v.value[0].real(), v.error[0], v.evaluations, v.converged};
}

QuadResult<cplx> integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                                   const QuadratureSettings& q) {
  VectorQuadSpec s;
  auto v = integrate_vector([&](double x, cplx* o) { o[0] = f(x); }, a, b, s, q);
  return {v.value[0], v.error[0], v.evaluations, v.converged};
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  if (n < 1) fail(Status::InvalidArgument, "gauss_legendre: order < 1");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto g = std::make_unique<GaussRule>();
  g->x.resize(n);
  g->w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5)), dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    g->x[i] = -z;
    g->x[n - 1 - i] = z;
    g->w[i] = g->w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  auto& ref = *g;
  cache.emplace(n, std::move(g));
  return ref;
}

}  // namespace harvest
