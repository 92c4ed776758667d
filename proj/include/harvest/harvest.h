/* C interface to the harvesting core. All functions return an hv_status;
 * on failure the context keeps a message (hv_last_error) and, for
 * tolerance or truncation failures, the achieved residual. A context must
 * not be shared between threads without external locking; create one per
 * thread instead. */
#ifndef HARVEST_HARVEST_H
#define HARVEST_HARVEST_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(HV_BUILDING)
#define HV_API __attribute__((visibility("default")))
#else
#define HV_API
#endif

typedef enum hv_status {
  HV_OK = 0,
  HV_INVALID_ARGUMENT = 1,
  HV_KIND_MISMATCH = 2,
  HV_INVALID_INDEX = 3,
  HV_UNSUPPORTED_ORDER = 4,
  HV_UNSUPPORTED_MODE = 5,
  HV_TOLERANCE_NOT_MET = 6,
  HV_GAP_MISMATCH = 7,
  HV_DOMAIN = 8,
  HV_INCONSISTENT_INPUT = 9,
  HV_TRUNCATION_FAILURE = 10,
  HV_UNSTABLE_POTENTIAL = 11,
  HV_STEP_SIZE = 12,
  HV_BELOW_NOISE = 13,
  HV_INTEGRABLE_SINGULARITY = 14,
  HV_INTERNAL = 15
} hv_status;

typedef struct hv_context hv_context;
typedef struct hv_lattice hv_lattice;

typedef enum hv_potential_kind { HV_HARMONIC = 0, HV_BOX = 1 } hv_potential_kind;
typedef enum hv_quad_method { HV_ADAPTIVE_GK = 0, HV_TENSOR_GL = 1, HV_MONTE_CARLO = 2 } hv_quad_method;

typedef struct hv_potential {
  int kind;           /* hv_potential_kind */
  double scale;       /* ell (harmonic) or side d (box) */
  double probe_mass;
  double center[3];   /* harmonic: trap center; box: lower corner */
} hv_potential;

typedef struct hv_switching {
  double T;
  double center_time;
} hv_switching;

typedef struct hv_detector {
  hv_potential potential;
  int mode[3];
  hv_switching switching;
  double lambda;
  int has_gap;  /* nonzero: use `gap` instead of the mode frequency */
  double gap;
} hv_detector;

typedef struct hv_target {
  double mass;
} hv_target;

typedef struct hv_quadrature {
  double rel_tol;
  double abs_tol;
  long max_evaluations;
  int method;  /* hv_quad_method */
  int closed_form_kernel;
  unsigned long long mc_seed;
  int mc_samples;
} hv_quadrature;

/* Complex values are {re, im}. */
typedef struct hv_harvest_result {
  double L_AA, L_BB;
  double L_AB[2], K_A[2], K_B[2], M[2];
  double negativity;
  double comm_estimate, comm_ratio;
  double err_L_AA, err_L_BB, err_L_AB, err_K_A, err_K_B, err_M, err_comm;
  int converged;
  double worst_ratio;
  long evaluations;
} hv_harvest_result;

typedef struct hv_purity_spec {
  double sigma;
  double ell;
  double mass_ell;
  int dim;
  double series_rel_tol;
} hv_purity_spec;

typedef struct hv_purity_result {
  double nu;
  double qq_var, pp_var;
  int terms_used;
  double truncation_bound;
  double completeness;
  int converged;
} hv_purity_result;

typedef struct hv_oracle_options {
  double dt;
  double window;
} hv_oracle_options;

typedef struct hv_oracle_row {
  double lambda;
  double n_exact, n_pert, residual;
  double n_multimode, cov_difference;
} hv_oracle_row;

typedef struct hv_oracle_summary {
  double slope;
  int points_used;
  int multimode;
  double multimode_slope;
  int multimode_points;
  double cov_slope;
  int cov_points;
} hv_oracle_summary;

HV_API const char* hv_status_string(hv_status s);

HV_API hv_context* hv_context_create(void);
HV_API void hv_context_destroy(hv_context* ctx);
HV_API const char* hv_last_error(const hv_context* ctx);
HV_API double hv_last_residual(const hv_context* ctx);

HV_API void hv_quadrature_defaults(hv_quadrature* q);
HV_API void hv_detector_defaults(hv_detector* d);
HV_API void hv_purity_defaults(hv_purity_spec* p);
HV_API void hv_oracle_defaults(hv_oracle_options* o);
HV_API const char* hv_quad_method_name(int method);
HV_API hv_status hv_quad_method_from_name(hv_context* ctx, const char* name, int* method);

HV_API hv_status hv_set_quadrature(hv_context* ctx, const hv_quadrature* q);
HV_API hv_status hv_get_quadrature(const hv_context* ctx, hv_quadrature* q);

HV_API hv_status hv_mode_frequency(hv_context* ctx, const hv_potential* p, const int mode[3], double* out);
HV_API hv_status hv_detector_gap(hv_context* ctx, const hv_detector* d, double* out);
HV_API hv_status hv_mode_overlap(hv_context* ctx, const int mode_a[3], const hv_potential* pa, const int mode_b[3],
                                 const hv_potential* pb, double* value, double* error);

/* Full leading-order scalar set for a detector pair. A non-converged
 * quadrature is reported through result->converged, not the status. */
HV_API hv_status hv_harvest(hv_context* ctx, const hv_detector* a, const hv_detector* b, const hv_target* f,
                            hv_harvest_result* out);

/* 9x9 row-major density matrix in the basis |nA nB>, nA,nB in {0,1,2}. */
HV_API hv_status hv_density_matrix(hv_context* ctx, const hv_harvest_result* r, double re[81], double im[81]);
HV_API hv_status hv_negativity_closed(hv_context* ctx, double L_AA, double L_BB, double M_re, double M_im,
                                      double* out);
HV_API hv_status hv_negativity_spectral(hv_context* ctx, const hv_harvest_result* r, double* out);

HV_API hv_status hv_purity(hv_context* ctx, const hv_purity_spec* p, hv_purity_result* out);
HV_API hv_status hv_purity_radius(hv_context* ctx, double mass_ell, int dim, double threshold, double series_rel_tol,
                                  double* out);
/* Exact F_d(n) as a decimal string; *needed receives the buffer size
 * (including the terminator) even when buf is too small. */
HV_API hv_status hv_f_weight(hv_context* ctx, int n, int dim, char* buf, size_t buflen, size_t* needed);

HV_API hv_status hv_lattice_from_json(hv_context* ctx, const char* json, hv_lattice** out);
HV_API void hv_lattice_destroy(hv_lattice* l);
HV_API hv_status hv_lattice_to_json(hv_context* ctx, const hv_lattice* l, char* buf, size_t buflen, size_t* needed);
HV_API hv_status hv_lattice_effective_probes(hv_context* ctx, const hv_lattice* l, int* count);

/* Runs the lambda sweep; rows must hold n entries. */
HV_API hv_status hv_residual_scaling(hv_context* ctx, const hv_lattice* l, const double* lambdas, size_t n,
                                     const hv_oracle_options* o, hv_oracle_row* rows, hv_oracle_summary* summary);

#ifdef __cplusplus
}
#endif

#endif
