/* C interface to the p,q-growth solver and verification workbench.
 *
 * All handles are opaque. Every function returning pq_status leaves a
 * human-readable message in pq_last_error() (thread-local) on failure.
 * Strings returned through char** are owned by the caller and released with
 * pq_string_free. JSON arguments are UTF-8 text.
 */
#ifndef PQ_PQ_H
#define PQ_PQ_H

#include <stddef.h>

#if defined(PQ_BUILDING_LIBRARY)
#define PQ_API __attribute__((visibility("default")))
#else
#define PQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum pq_status {
  PQ_OK = 0,
  PQ_VERIFICATION_FAILED = 1, /* a check or verdict failed; outputs are still produced */
  PQ_NUMERICAL_FAILURE = 2,   /* NonConvergence, SingularJacobian, QuadratureFailure */
  PQ_CONFIG_ERROR = 3         /* malformed or inadmissible input */
} pq_status;

typedef struct pq_operator pq_operator;
typedef struct pq_config pq_config;
typedef struct pq_trace pq_trace;

PQ_API const char* pq_version(void);
PQ_API const char* pq_last_error(void);
/* Name of the library error behind the last failure, e.g. "InvalidExponents". */
PQ_API const char* pq_last_error_code(void);
PQ_API void pq_string_free(char* s);

/* Worker threads for sampling and assembly; 0 = hardware concurrency.
 * Results are identical for every value. */
PQ_API void pq_set_threads(unsigned threads);

/* --- Operators --------------------------------------------------------- */

PQ_API pq_status pq_operator_from_json(const char* descriptor, pq_operator** out);
PQ_API void pq_operator_free(pq_operator* op);
PQ_API int pq_operator_dim(const pq_operator* op);
/* x, xi and out have pq_operator_dim entries; n must equal it. */
PQ_API pq_status pq_operator_flux(const pq_operator* op, const double* x, double u,
                                  const double* xi, double* out, size_t n);
/* Row-major n*n output. */
PQ_API pq_status pq_operator_dflux_dxi(const pq_operator* op, const double* x, double u,
                                       const double* xi, double* out, size_t n);
PQ_API pq_status pq_operator_regularize(const pq_operator* op, double eps, double eps0,
                                        pq_operator** out);

/* --- Configuration ------------------------------------------------------ */

/* Experiment config: {"operator", "rhs", "mesh", "schedule", "newton",
 * "estimates": {"rho","R","delta"}, "sampling", "case", "grids",
 * "linear_presolve"}. Unknown keys are rejected. */
PQ_API pq_status pq_config_from_json(const char* json, pq_config** out);
PQ_API void pq_config_free(pq_config* cfg);
PQ_API pq_status pq_config_to_json(const pq_config* cfg, char** out);

/* --- Runs --------------------------------------------------------------- */

/* Full structural report as JSON. PQ_VERIFICATION_FAILED if any entry fails. */
PQ_API pq_status pq_run_check(const pq_config* cfg, char** report_json);
/* Direct Newton solve on the unregularized operator; field + stats as JSON. */
PQ_API pq_status pq_run_solve(const pq_config* cfg, char** result_json);
/* On numerical failure *out still receives the partial trace when one exists. */
PQ_API pq_status pq_run_continuation(const pq_config* cfg, pq_trace** out);

PQ_API pq_status pq_trace_from_json(const char* json, pq_trace** out);
PQ_API pq_status pq_trace_to_json(const pq_trace* trace, char** out);
PQ_API pq_status pq_trace_to_csv(const pq_trace* trace, char** out);
PQ_API int pq_trace_steps(const pq_trace* trace);
PQ_API void pq_trace_free(pq_trace* trace);

/* Estimates for a trace. rho/R/delta come from cfg (may be NULL for defaults);
 * rho and R are absolute radii. PQ_VERIFICATION_FAILED when a uniformity
 * verdict fails. */
PQ_API pq_status pq_run_estimates(const pq_trace* trace, const pq_config* cfg, char** csv,
                                  char** summary_json);
/* Convergence study for cfg.case over cfg.grids. */
PQ_API pq_status pq_run_mms(const pq_config* cfg, char** csv);
/* Summary JSON from a trace document and an estimates CSV. */
PQ_API pq_status pq_report_merge(const char* trace_json, const char* estimates_csv, char** out);

#ifdef __cplusplus
}
#endif

#endif /* PQ_PQ_H */
