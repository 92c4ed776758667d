#include "harvest/harvest.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "harvest/errors.hpp"
#include "harvest/harvesting.hpp"
#include "harvest/modes.hpp"
#include "harvest/oracle.hpp"
#include "harvest/purity.hpp"
#include "harvest/smearing.hpp"

struct hv_context {
  std::string error;
  double residual = 0.0;
  harvest::QuadratureSettings quad;
};

struct hv_lattice {
  harvest::LatticeModel model;
};

namespace {

using namespace harvest;

static_assert(static_cast<int>(Status::Internal) == HV_INTERNAL, "status codes out of sync");

template <class F>
hv_status guard(hv_context* ctx, F&& f) {
  if (!ctx) return HV_INVALID_ARGUMENT;
  ctx->error.clear();
  ctx->residual = 0.0;
  try {
    f();
    return HV_OK;
  } catch (const Error& e) {
    ctx->error = e.what();
    ctx->residual = e.residual();
    return static_cast<hv_status>(e.code());
  } catch (const std::bad_alloc&) {
    ctx->error = "out of memory";
  } catch (const std::exception& e) {
    ctx->error = e.what();
  } catch (...) {
    ctx->error = "unknown exception";
  }
  return HV_INTERNAL;
}

void need(const void* p, const char* name) {
  if (!p) fail(Status::InvalidArgument, std::string(name) + " is null");
}

PotentialSpec to_cpp(const hv_potential& p) {
  PotentialSpec s;
  if (p.kind == HV_HARMONIC)
    s.kind = PotentialKind::Harmonic;
  else if (p.kind == HV_BOX)
    s.kind = PotentialKind::Box;
  else
    fail(Status::InvalidArgument, "potential.kind must be harmonic or box");
  s.scale = p.scale;
  s.probe_mass = p.probe_mass;
  s.center = {p.center[0], p.center[1], p.center[2]};
  return s;
}

ModeIndex to_cpp(const int m[3]) { return {m[0], m[1], m[2]}; }

DetectorSpec to_cpp(const hv_detector& d) {
  DetectorSpec s;
  s.potential = to_cpp(d.potential);
  s.mode = to_cpp(d.mode);
  s.switching = {d.switching.T, d.switching.center_time};
  s.lambda = d.lambda;
  if (d.has_gap) s.gap = d.gap;
  return s;
}

HarvestingResult to_cpp(const hv_harvest_result& r) {
  HarvestingResult h;
  h.L_AA = r.L_AA;
  h.L_BB = r.L_BB;
  h.L_AB = {r.L_AB[0], r.L_AB[1]};
  h.K_A = {r.K_A[0], r.K_A[1]};
  h.K_B = {r.K_B[0], r.K_B[1]};
  h.M = {r.M[0], r.M[1]};
  return h;
}

void put(double out[2], cplx z) {
  out[0] = z.real();
  out[1] = z.imag();
}

void copy_string(const std::string& s, char* buf, size_t buflen, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || buflen < s.size() + 1) fail(Status::InvalidArgument, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* hv_status_string(hv_status s) {
  if (s < HV_OK || s > HV_INTERNAL) return "unknown";
  return status_name(static_cast<Status>(s));
}

hv_context* hv_context_create(void) { return new (std::nothrow) hv_context(); }

void hv_context_destroy(hv_context* ctx) { delete ctx; }

const char* hv_last_error(const hv_context* ctx) { return ctx ? ctx->error.c_str() : "null context"; }

double hv_last_residual(const hv_context* ctx) { return ctx ? ctx->residual : 0.0; }

void hv_quadrature_defaults(hv_quadrature* q) {
  if (!q) return;
  QuadratureSettings s;
  q->rel_tol = s.rel_tol;
  q->abs_tol = s.abs_tol;
  q->max_evaluations = s.max_evaluations;
  q->method = static_cast<int>(s.method);
  q->closed_form_kernel = s.closed_form_kernel;
  q->mc_seed = s.mc_seed;
  q->mc_samples = s.mc_samples;
}

void hv_detector_defaults(hv_detector* d) {
  if (!d) return;
  DetectorSpec s;
  std::memset(d, 0, sizeof(*d));
  d->potential.kind = HV_HARMONIC;
  d->potential.scale = s.potential.scale;
  d->potential.probe_mass = s.potential.probe_mass;
  d->switching.T = s.switching.T;
  d->switching.center_time = s.switching.center_time;
  d->lambda = s.lambda;
}

void hv_purity_defaults(hv_purity_spec* p) {
  if (!p) return;
  PuritySpec s;
  p->sigma = s.sigma;
  p->ell = s.ell;
  p->mass_ell = s.mass_ell;
  p->dim = s.dim;
  p->series_rel_tol = s.series_rel_tol;
}

void hv_oracle_defaults(hv_oracle_options* o) {
  if (!o) return;
  ExactOptions e;
  o->dt = e.dt;
  o->window = e.window;
}

const char* hv_quad_method_name(int method) {
  if (method < HV_ADAPTIVE_GK || method > HV_MONTE_CARLO) return "unknown";
  return method_name(static_cast<QuadMethod>(method));
}

hv_status hv_quad_method_from_name(hv_context* ctx, const char* name, int* method) {
  return guard(ctx, [&] {
    need(name, "name");
    need(method, "method");
    *method = static_cast<int>(method_from_name(name));
  });
}

hv_status hv_set_quadrature(hv_context* ctx, const hv_quadrature* q) {
  return guard(ctx, [&] {
    need(q, "quadrature");
    if (q->method < HV_ADAPTIVE_GK || q->method > HV_MONTE_CARLO)
      fail(Status::InvalidArgument, "quadrature.method out of range");
    QuadratureSettings s;
    s.rel_tol = q->rel_tol;
    s.abs_tol = q->abs_tol;
    s.max_evaluations = q->max_evaluations;
    s.method = static_cast<QuadMethod>(q->method);
    s.closed_form_kernel = q->closed_form_kernel != 0;
    s.mc_seed = static_cast<unsigned>(q->mc_seed);
    s.mc_samples = q->mc_samples;
    validate(s);
    ctx->quad = s;
  });
}

hv_status hv_get_quadrature(const hv_context* ctx, hv_quadrature* q) {
  if (!ctx || !q) return HV_INVALID_ARGUMENT;
  const auto& s = ctx->quad;
  q->rel_tol = s.rel_tol;
  q->abs_tol = s.abs_tol;
  q->max_evaluations = s.max_evaluations;
  q->method = static_cast<int>(s.method);
  q->closed_form_kernel = s.closed_form_kernel;
  q->mc_seed = s.mc_seed;
  q->mc_samples = s.mc_samples;
  return HV_OK;
}

hv_status hv_mode_frequency(hv_context* ctx, const hv_potential* p, const int mode[3], double* out) {
  return guard(ctx, [&] {
    need(p, "potential");
    need(mode, "mode");
    need(out, "out");
    *out = mode_frequency(to_cpp(mode), to_cpp(*p));
  });
}

hv_status hv_detector_gap(hv_context* ctx, const hv_detector* d, double* out) {
  return guard(ctx, [&] {
    need(d, "detector");
    need(out, "out");
    *out = detector_gap(to_cpp(*d));
  });
}

hv_status hv_mode_overlap(hv_context* ctx, const int mode_a[3], const hv_potential* pa, const int mode_b[3],
                          const hv_potential* pb, double* value, double* error) {
  return guard(ctx, [&] {
    need(mode_a, "mode_a");
    need(mode_b, "mode_b");
    need(pa, "potential_a");
    need(pb, "potential_b");
    need(value, "value");
    auto r = mode_overlap(to_cpp(mode_a), to_cpp(*pa), to_cpp(mode_b), to_cpp(*pb));
    *value = r.value;
    if (error) *error = r.error;
  });
}

hv_status hv_harvest(hv_context* ctx, const hv_detector* a, const hv_detector* b, const hv_target* f,
                     hv_harvest_result* out) {
  return guard(ctx, [&] {
    need(a, "detector_a");
    need(b, "detector_b");
    need(f, "target");
    need(out, "out");
    TargetFieldSpec t;
    t.mass = f->mass;
    auto r = harvest::harvest(to_cpp(*a), to_cpp(*b), t, ctx->quad);
    out->L_AA = r.L_AA;
    out->L_BB = r.L_BB;
    put(out->L_AB, r.L_AB);
    put(out->K_A, r.K_A);
    put(out->K_B, r.K_B);
    put(out->M, r.M);
    out->negativity = r.negativity;
    out->comm_estimate = r.comm_estimate;
    out->comm_ratio = r.comm_ratio;
    out->err_L_AA = r.err_L_AA;
    out->err_L_BB = r.err_L_BB;
    out->err_L_AB = r.err_L_AB;
    out->err_K_A = r.err_K_A;
    out->err_K_B = r.err_K_B;
    out->err_M = r.err_M;
    out->err_comm = r.err_comm;
    out->converged = r.converged;
    out->worst_ratio = r.worst_ratio;
    out->evaluations = r.evaluations;
  });
}

hv_status hv_density_matrix(hv_context* ctx, const hv_harvest_result* r, double re[81], double im[81]) {
  return guard(ctx, [&] {
    need(r, "result");
    need(re, "re");
    need(im, "im");
    auto s = assemble_rho(to_cpp(*r));
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        re[9 * i + j] = s.rho(i, j).real();
        im[9 * i + j] = s.rho(i, j).imag();
      }
  });
}

hv_status hv_negativity_closed(hv_context* ctx, double L_AA, double L_BB, double M_re, double M_im,
                               double* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = negativity_closed(L_AA, L_BB, {M_re, M_im});
  });
}

hv_status hv_negativity_spectral(hv_context* ctx, const hv_harvest_result* r, double* out) {
  return guard(ctx, [&] {
    need(r, "result");
    need(out, "out");
    *out = negativity_from_rho(assemble_rho(to_cpp(*r)));
  });
}

hv_status hv_purity(hv_context* ctx, const hv_purity_spec* p, hv_purity_result* out) {
  return guard(ctx, [&] {
    need(p, "purity_spec");
    need(out, "out");
    PuritySpec s;
    s.sigma = p->sigma;
    s.ell = p->ell;
    s.mass_ell = p->mass_ell;
    s.dim = p->dim;
    s.series_rel_tol = p->series_rel_tol;
    auto r = symplectic_eigenvalue(s);
    out->nu = r.nu;
    out->qq_var = r.qq_var;
    out->pp_var = r.pp_var;
    out->terms_used = r.terms_used;
    out->truncation_bound = r.truncation_bound;
    out->completeness = r.completeness;
    out->converged = r.converged;
  });
}

hv_status hv_purity_radius(hv_context* ctx, double mass_ell, int dim, double threshold, double series_rel_tol,
                           double* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = purity_radius(mass_ell, dim, threshold, series_rel_tol);
  });
}

hv_status hv_f_weight(hv_context* ctx, int n, int dim, char* buf, size_t buflen, size_t* needed) {
  return guard(ctx, [&] { copy_string(f_weight(n, dim).str(), buf, buflen, needed); });
}

hv_status hv_lattice_from_json(hv_context* ctx, const char* json, hv_lattice** out) {
  return guard(ctx, [&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    auto l = std::make_unique<hv_lattice>();
    l->model = lattice_from_json(json);
    *out = l.release();
  });
}

void hv_lattice_destroy(hv_lattice* l) { delete l; }

hv_status hv_lattice_to_json(hv_context* ctx, const hv_lattice* l, char* buf, size_t buflen, size_t* needed) {
  return guard(ctx, [&] {
    need(l, "lattice");
    copy_string(lattice_to_json(l->model), buf, buflen, needed);
  });
}

hv_status hv_lattice_effective_probes(hv_context* ctx, const hv_lattice* l, int* count) {
  return guard(ctx, [&] {
    need(l, "lattice");
    need(count, "count");
    *count = static_cast<int>(effective_probes(l->model).size());
  });
}

hv_status hv_residual_scaling(hv_context* ctx, const hv_lattice* l, const double* lambdas, size_t n,
                              const hv_oracle_options* o, hv_oracle_row* rows, hv_oracle_summary* summary) {
  return guard(ctx, [&] {
    need(l, "lattice");
    need(lambdas, "lambdas");
    need(rows, "rows");
    need(summary, "summary");
    ExactOptions eo;
    if (o) {
      eo.dt = o->dt;
      eo.window = o->window;
    }
    auto r = residual_scaling(l->model, std::vector<double>(lambdas, lambdas + n), eo);
    for (size_t i = 0; i < n; ++i) {
      const auto& s = r.rows[i];
      rows[i] = {s.lambda, s.n_exact, s.n_pert, s.residual, s.n_multimode, s.cov_difference};
    }
    summary->slope = r.slope;
    summary->points_used = r.points_used;
    summary->multimode = r.multimode;
    summary->multimode_slope = r.multimode_slope;
    summary->multimode_points = r.multimode_points;
    summary->cov_slope = r.cov_slope;
    summary->cov_points = r.cov_points;
  });
}

}  // extern "C"
