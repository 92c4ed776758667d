#include "runners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <thread>

#include "pool.hpp"

namespace cli {

namespace {

using Ctx = std::unique_ptr<hv_context, decltype(&hv_context_destroy)>;

Ctx make_context() {
  Ctx c(hv_context_create(), &hv_context_destroy);
  if (!c) throw std::runtime_error("cannot allocate library context");
  return c;
}

[[noreturn]] void raise(hv_context* ctx, hv_status s, const std::string& what) {
  throw std::runtime_error(what + ": " + hv_status_string(s) + ": " + hv_last_error(ctx));
}

hv_detector to_detector(const DetectorConfig& d) {
  hv_detector h;
  hv_detector_defaults(&h);
  h.potential.kind = d.kind == "box" ? HV_BOX : HV_HARMONIC;
  h.potential.scale = d.scale;
  h.potential.probe_mass = d.probe_mass;
  for (int i = 0; i < 3; ++i) {
    h.potential.center[i] = d.center[i];
    h.mode[i] = d.mode[i];
  }
  h.switching.T = d.T;
  h.switching.center_time = d.center_time;
  h.lambda = d.lambda;
  if (d.gap) {
    h.has_gap = 1;
    h.gap = *d.gap;
  }
  return h;
}

std::vector<std::string> provenance(const RunConfig& c) {
  std::vector<std::string> h;
  h.push_back("harvest-cli run: " + c.label);
  for (const auto& n : c.notes) h.push_back("note: " + n);
  // Thread count does not change the numbers, so it stays out of the header.
  auto j = config_to_json(c);
  j.erase("workers");
  h.push_back("config: " + j.dump());
  return h;
}

}  // namespace

bool uses_rng(const RunConfig& c) { return c.command == Command::Harvest && c.quadrature.method == HV_MONTE_CARLO; }

Table run_harvest(const RunConfig& c, std::vector<std::string>& log) {
  struct Point {
    double value, separation;
  };
  std::vector<Point> pts;
  auto values = sweep_values(c.sweep);
  if (c.sweep.axis == Axis::Separation) {
    for (double v : values) pts.push_back({v, v});
  } else {
    for (double L : c.separations)
      for (double v : values) pts.push_back({v, L});
  }

  Table t;
  t.header_comments = provenance(c);
  t.columns = {"sweep_value", "separation", "gap", "L_AA", "L_BB", "L_AB_re", "L_AB_im", "K_A_re", "K_A_im",
               "K_B_re", "K_B_im", "M_re", "M_im", "negativity", "negativity_over_lambda2", "comm_ratio",
               "err_L", "err_M", "status"};
  t.rows.resize(pts.size());

  int workers = c.workers;
  std::vector<Ctx> ctxs;
  int nthreads = workers <= 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : workers;
  for (int w = 0; w < nthreads; ++w) {
    ctxs.push_back(make_context());
    hv_status s = hv_set_quadrature(ctxs.back().get(), &c.quadrature);
    if (s != HV_OK) raise(ctxs.back().get(), s, "quadrature");
  }

  parallel_for(static_cast<int>(pts.size()), nthreads, [&](int w, int i) {
    hv_context* ctx = ctxs[w].get();
    hv_detector a = to_detector(c.detector_a), b = to_detector(c.detector_b);
    for (int k = 0; k < 3; ++k) b.potential.center[k] += pts[i].separation * c.direction[k];
    if (c.sweep.axis == Axis::Gap) {
      a.has_gap = b.has_gap = 1;
      a.gap = b.gap = pts[i].value;
    }
    hv_target f{c.target_mass};
    hv_harvest_result r{};
    double gap = NAN;
    hv_status s = hv_detector_gap(ctx, &a, &gap);
    if (s == HV_OK) s = hv_harvest(ctx, &a, &b, &f, &r);
    auto& row = t.rows[i];
    row = {fmt(pts[i].value), fmt(pts[i].separation), fmt(gap)};
    if (s != HV_OK) {
      for (size_t k = row.size(); k + 1 < t.columns.size(); ++k) row.push_back("nan");
      row.push_back(hv_status_string(s));
      return;
    }
    double l2 = a.lambda * b.lambda;
    row.insert(row.end(),
               {fmt(r.L_AA), fmt(r.L_BB), fmt(r.L_AB[0]), fmt(r.L_AB[1]), fmt(r.K_A[0]), fmt(r.K_A[1]),
                fmt(r.K_B[0]), fmt(r.K_B[1]), fmt(r.M[0]), fmt(r.M[1]), fmt(r.negativity),
                fmt(l2 > 0 ? r.negativity / l2 : NAN), fmt(r.comm_ratio),
                fmt(std::max({r.err_L_AA, r.err_L_BB, r.err_L_AB})), fmt(r.err_M),
                r.converged ? "ok" : hv_status_string(HV_TOLERANCE_NOT_MET)});
  });

  size_t bad = 0;
  for (const auto& r : t.rows)
    if (r.back() != "ok") ++bad;
  log.push_back(std::to_string(t.rows.size()) + " points, " + std::to_string(bad) + " not ok");
  return t;
}

Table run_purity(const RunConfig& c, std::vector<std::string>& log) {
  auto ratios = sweep_values(c.sweep);
  const auto& dims = c.purity.dims;
  Table t;
  t.header_comments = provenance(c);
  t.columns = {"sigma_over_ell", "dim", "nu", "terms_used", "truncation_bound", "status"};

  auto ctx = make_context();
  for (int d : dims) {
    double r = NAN;
    hv_status s = hv_purity_radius(ctx.get(), c.purity.mass_ell, d, c.purity.purity_threshold,
                                   c.purity.series_rel_tol, &r);
    std::string line;
    if (s == HV_OK) {
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "purity interval dim=%d: nu <= 1 + %g for sigma/ell in [%.6f, %.6f] (%.3f decades)", d,
                    c.purity.purity_threshold, std::exp(-r), std::exp(r), 2.0 * r / std::log(10.0));
      line = buf;
    } else {
      line = "purity interval dim=" + std::to_string(d) + ": " + hv_status_string(s) + ": " +
             hv_last_error(ctx.get());
    }
    t.header_comments.push_back(line);
    log.push_back(line);
  }

  int n = static_cast<int>(ratios.size() * dims.size());
  t.rows.resize(n);
  int nthreads = c.workers <= 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : c.workers;
  std::vector<Ctx> ctxs;
  for (int w = 0; w < nthreads; ++w) ctxs.push_back(make_context());
  parallel_for(n, nthreads, [&](int w, int i) {
    int d = dims[i / ratios.size()];
    double ratio = ratios[i % ratios.size()];
    hv_purity_spec p;
    hv_purity_defaults(&p);
    p.sigma = ratio;
    p.ell = 1.0;
    p.mass_ell = c.purity.mass_ell;
    p.dim = d;
    p.series_rel_tol = c.purity.series_rel_tol;
    hv_purity_result r{};
    hv_status s = hv_purity(ctxs[w].get(), &p, &r);
    if (s != HV_OK)
      t.rows[i] = {fmt(ratio), fmt(d), "nan", "0", fmt(hv_last_residual(ctxs[w].get())), hv_status_string(s)};
    else
      t.rows[i] = {fmt(ratio), fmt(d), fmt(r.nu), fmt(r.terms_used), fmt(r.truncation_bound), "ok"};
  });
  return t;
}

Table run_oracle(const RunConfig& c, std::vector<std::string>& log) {
  auto ctx = make_context();
  hv_lattice* raw = nullptr;
  std::string text = c.lattice.dump();
  hv_status s = hv_lattice_from_json(ctx.get(), text.c_str(), &raw);
  if (s != HV_OK) raise(ctx.get(), s, "lattice");
  std::unique_ptr<hv_lattice, decltype(&hv_lattice_destroy)> lat(raw, &hv_lattice_destroy);

  std::vector<double> lambdas = sweep_values(c.sweep);
  if (c.oracle.include_zero) lambdas.insert(lambdas.begin(), 0.0);
  std::vector<hv_oracle_row> rows(lambdas.size());
  hv_oracle_summary sum{};
  hv_oracle_options o{c.oracle.dt, c.oracle.window};
  s = hv_residual_scaling(ctx.get(), lat.get(), lambdas.data(), lambdas.size(), &o, rows.data(), &sum);
  if (s != HV_OK) raise(ctx.get(), s, "oracle");

  Table t;
  t.header_comments = provenance(c);
  t.columns = {"lambda", "N_exact", "N_pert", "residual", "N_multimode", "cov_difference"};
  for (const auto& r : rows)
    t.rows.push_back(
        {fmt(r.lambda), fmt(r.n_exact), fmt(r.n_pert), fmt(r.residual), fmt(r.n_multimode), fmt(r.cov_difference)});
  char buf[256];
  std::snprintf(buf, sizeof buf, "fit residual_slope=%.6f points=%d", sum.slope, sum.points_used);
  t.footer_comments.push_back(buf);
  log.push_back(buf);
  if (sum.multimode) {
    std::snprintf(buf, sizeof buf, "fit multimode_residual_slope=%.6f points=%d covariance_slope=%.6f points=%d",
                  sum.multimode_slope, sum.multimode_points, sum.cov_slope, sum.cov_points);
    t.footer_comments.push_back(buf);
    log.push_back(buf);
  }
  return t;
}

Table run(const RunConfig& c, std::vector<std::string>& log) {
  switch (c.command) {
    case Command::Harvest: return run_harvest(c, log);
    case Command::Purity: return run_purity(c, log);
    case Command::Oracle: return run_oracle(c, log);
  }
  throw std::logic_error("unknown command");
}

PlotSpec default_plot(const RunConfig& c) {
  PlotSpec p;
  p.title = c.label;
  switch (c.command) {
    case Command::Harvest:
      p.x = "sweep_value";
      p.y = {"negativity"};
      if (c.sweep.axis == Axis::Gap && c.separations.size() > 1) p.group = "separation";
      break;
    case Command::Purity:
      p.x = "sigma_over_ell";
      p.y = {"nu"};
      p.group = "dim";
      p.logx = true;
      break;
    case Command::Oracle:
      p.x = "lambda";
      p.y = {"residual"};
      p.logx = p.logy = true;
      break;
  }
  return p;
}

}  // namespace cli
