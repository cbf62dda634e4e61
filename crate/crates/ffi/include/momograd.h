#ifndef MOMOGRAD_H
#define MOMOGRAD_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MgStatus {
  MG_STATUS_OK = 0,
  MG_STATUS_NULL_POINTER = 1,
  MG_STATUS_INVALID_ARGUMENT = 2,
  MG_STATUS_UNKNOWN_PROBLEM = 3,
  MG_STATUS_DIMENSION_MISMATCH = 4,
  MG_STATUS_INVALID_CONFIG = 5,
  MG_STATUS_EVAL_ERROR = 6,
  MG_STATUS_INDEX_OUT_OF_RANGE = 7,
  MG_STATUS_PANIC = 99,
} MgStatus;

typedef enum MgMethod {
  MG_METHOD_MMG_I = 0,
  MG_METHOD_MMG_II = 1,
  MG_METHOD_SD = 2,
  MG_METHOD_FR = 3,
  MG_METHOD_CD = 4,
  MG_METHOD_HS = 5,
} MgMethod;

typedef enum MgGammaRule {
  MG_GAMMA_RULE_CONSTANT = 0,
  MG_GAMMA_RULE_BB = 1,
} MgGammaRule;

typedef enum MgInitMode {
  MG_INIT_MODE_UNIT = 0,
  MG_INIT_MODE_TAU_K = 1,
} MgInitMode;

typedef enum MgTerminal {
  MG_TERMINAL_CRITICAL = 0,
  MG_TERMINAL_MAX_ITERS = 1,
  MG_TERMINAL_LINE_SEARCH_FAIL = 2,
  MG_TERMINAL_EVAL_ERROR = 3,
  MG_TERMINAL_DESCENT_FAILURE = 4,
} MgTerminal;

// Solver settings. Starts from the defaults of the chosen method.
typedef struct MgConfig MgConfig;

// A registered test problem.
typedef struct MgProblem MgProblem;

// Result of one solver run.
typedef struct MgTrace MgTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *mg_last_error(void);

// Library version as a static string.
const char *mg_version(void);

// Number of registered problems.
size_t mg_problem_count(void);

// Name of the `index`-th registered problem, or null when out of range.
const char *mg_problem_name(size_t index);

// Looks up a problem by name (case-insensitive).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable pointer.
enum MgStatus mg_problem_new(const char *name, struct MgProblem **out);

// # Safety
// `problem` must come from [`mg_problem_new`] and not be freed twice.
void mg_problem_free(struct MgProblem *problem);

// Number of variables; 0 for a null handle.
//
// # Safety
// `problem` must be null or a live handle.
size_t mg_problem_dim(const struct MgProblem *problem);

// Number of objectives; 0 for a null handle.
//
// # Safety
// `problem` must be null or a live handle.
size_t mg_problem_num_objectives(const struct MgProblem *problem);

// Sampling box of the problem. Both arrays hold `n` values.
//
// # Safety
// `lower` and `upper` must each point to `n` writable doubles.
enum MgStatus mg_problem_bounds(const struct MgProblem *problem,
                                double *lower,
                                double *upper,
                                size_t n);

// Objective values at `x` (length `n`) into `f` (length `m`).
//
// # Safety
// Arrays must hold the stated number of doubles.
enum MgStatus mg_problem_eval(const struct MgProblem *problem,
                              const double *x,
                              size_t n,
                              double *f,
                              size_t m);

// Row-major Jacobian at `x` into `jac` (length `m * n`).
//
// # Safety
// Arrays must hold the stated number of doubles.
enum MgStatus mg_problem_jacobian(const struct MgProblem *problem,
                                  const double *x,
                                  size_t n,
                                  double *jac,
                                  size_t len);

// Uniform start points from the problem's box, `count` rows of `dim`
// values, reproducible from `seed`.
//
// # Safety
// `out` must hold `len` doubles.
enum MgStatus mg_problem_sample_starts(const struct MgProblem *problem,
                                       size_t count,
                                       uint64_t seed,
                                       double *out,
                                       size_t len);

// New configuration with the defaults of `method`. The memory gradient
// defaults are `N = 5` with constant `γ`.
struct MgConfig *mg_config_new(enum MgMethod method);

// # Safety
// `config` must come from [`mg_config_new`] and not be freed twice.
void mg_config_free(struct MgConfig *config);

// Number of stored directions `N`.
//
// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_memory(struct MgConfig *config, size_t memory);

// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_gamma_rule(struct MgConfig *config, enum MgGammaRule rule);

// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_zeta(struct MgConfig *config, double zeta);

// Armijo constant and backtracking factor.
//
// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_armijo(struct MgConfig *config, double rho, double delta);

// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_init_mode(struct MgConfig *config, enum MgInitMode mode);

// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_eps_theta(struct MgConfig *config, double eps);

// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_max_iters(struct MgConfig *config, size_t max_iters);

// Jacobian Lipschitz constant used by `MG_METHOD_MMG_II`. A NaN clears it.
//
// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_lipschitz(struct MgConfig *config, double lipschitz);

// Keep per-iteration vectors; off by default.
//
// # Safety
// `config` must be null or a live handle.
enum MgStatus mg_config_set_record_vectors(struct MgConfig *config, bool on);

// Runs the solver from `x0`. Returns `MG_STATUS_OK` whenever a trace was
// produced, whatever its terminal status; the trace goes to `*out`.
//
// # Safety
// Handles must be live, `x0` must hold `n` doubles and `out` be writable.
enum MgStatus mg_solve(const struct MgProblem *problem,
                       const struct MgConfig *config,
                       const double *x0,
                       size_t n,
                       struct MgTrace **out);

// # Safety
// `trace` must come from [`mg_solve`] and not be freed twice.
void mg_trace_free(struct MgTrace *trace);

// # Safety
// `trace` must be a live handle.
enum MgStatus mg_trace_status(const struct MgTrace *trace, enum MgTerminal *out);

// Iterations, objective evaluations and Jacobian evaluations. Any output
// pointer may be null.
//
// # Safety
// `trace` must be a live handle; non-null outputs must be writable.
enum MgStatus mg_trace_counts(const struct MgTrace *trace,
                              size_t *iterations,
                              size_t *f_evals,
                              size_t *jac_evals);

// Criticality measure and `‖v‖∞` at the final iterate. Either output may
// be null.
//
// # Safety
// `trace` must be a live handle; non-null outputs must be writable.
enum MgStatus mg_trace_criticality(const struct MgTrace *trace, double *theta, double *v_norm);

// Final iterate into `x` (length `n`).
//
// # Safety
// `x` must hold `n` doubles.
enum MgStatus mg_trace_final_x(const struct MgTrace *trace, double *x, size_t n);

// Objective values at the final iterate into `f` (length `m`).
//
// # Safety
// `f` must hold `m` doubles.
enum MgStatus mg_trace_final_f(const struct MgTrace *trace, double *f, size_t m);

// Step size and criticality measure of iteration `k`.
//
// # Safety
// `trace` must be a live handle; non-null outputs must be writable.
enum MgStatus mg_trace_record(const struct MgTrace *trace, size_t k, double *alpha, double *theta);

// Nondominated subset of `count` points of dimension `m` (row-major). The
// kept points are written to the front of `out` (capacity `count * m`)
// and their number to `*kept`.
//
// # Safety
// `data` and `out` must hold `count * m` doubles; `kept` must be writable.
enum MgStatus mg_pareto_filter(const double *data,
                               size_t count,
                               size_t m,
                               double *out,
                               size_t *kept);

// Spacing of a front of `count` points. Writes NaN when it is undefined
// (fewer than two points).
//
// # Safety
// `data` must hold `count * m` doubles; `out` must be writable.
enum MgStatus mg_spacing(const double *data, size_t count, size_t m, double *out);

// Fraction of the `pooled` points matched by some point of `front`, with
// matches tested in the ∞-norm at `match_tol`.
//
// # Safety
// `front` must hold `front_count * m` doubles, `pooled` `pooled_count * m`
// doubles; `out` must be writable.
enum MgStatus mg_purity(const double *front,
                        size_t front_count,
                        const double *pooled,
                        size_t pooled_count,
                        size_t m,
                        double match_tol,
                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMOGRAD_H */
