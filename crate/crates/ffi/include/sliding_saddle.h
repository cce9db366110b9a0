#ifndef SLIDING_SADDLE_H
#define SLIDING_SADDLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SS_METHOD_SLIDING 0

#define SS_METHOD_EXTRAGRADIENT 1

#define SS_METHOD_GDA 2

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_ARGUMENT = 2,
  SS_STATUS_DIMENSION_MISMATCH = 3,
  SS_STATUS_ASSUMPTION_VIOLATION = 4,
  SS_STATUS_NUMERICAL = 5,
  SS_STATUS_IO = 6,
  SS_STATUS_PANIC = 7,
} SsStatus;

typedef enum SsRunStatus {
  SS_RUN_STATUS_CONVERGED = 0,
  SS_RUN_STATUS_DIVERGED = 1,
  /**
   * Iteration or restart budget exhausted.
   */
  SS_RUN_STATUS_STOPPED = 2,
} SsRunStatus;

/**
 * Opaque problem handle.
 */
typedef struct SsProblem SsProblem;

typedef struct SsParams {
  double l_x;
  double l_y;
  double l_xy;
  double mu_x;
  double mu_y;
  double mu_xy;
  double mu_yx;
} SsParams;

typedef struct SsCondition {
  double delta_x;
  double delta_y;
  double kappa_x;
  double kappa_y;
  double kappa_xy;
} SsCondition;

typedef struct SsCounts {
  uint64_t grad_f;
  uint64_t grad_g;
  uint64_t matvec_b;
  uint64_t matvec_bt;
} SsCounts;

typedef struct SsReport {
  enum SsRunStatus status;
  /**
   * Restarts for the sliding method, iterations for baselines.
   */
  size_t phases;
  /**
   * Final weighted squared distance to the solution set; NaN if unknown.
   */
  double final_r2;
  double exec_time;
  struct SsCounts counts;
} SsReport;

/**
 * Library version as a static NUL-terminated string.
 */
const char *ss_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ss_last_error(void);

/**
 * Builds a named preset. Names match the command-line tool.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SsStatus ss_problem_preset(const char *name, uint64_t seed, struct SsProblem **out);

/**
 * Loads an instance file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SsStatus ss_problem_load(const char *path, struct SsProblem **out);

/**
 * Builds `f(x) = ½xᵀH_f x + q_fᵀx`, `g(y) = ½yᵀH_g y + q_gᵀy` coupled by `B`.
 *
 * # Safety
 * `h_f` holds `dim_x²` values, `q_f` `dim_x`, `h_g` `dim_y²`, `q_g`
 * `dim_y`, `b` `dim_y * dim_x`. `params` and `out` must be valid.
 */
enum SsStatus ss_problem_quadratic(size_t dim_x,
                                   size_t dim_y,
                                   const double *h_f,
                                   const double *q_f,
                                   const double *h_g,
                                   const double *q_g,
                                   const double *b,
                                   const struct SsParams *params,
                                   struct SsProblem **out);

/**
 * Frees a handle. NULL is ignored.
 *
 * # Safety
 * `p` must come from an `ss_problem_*` constructor and not be used again.
 */
void ss_problem_free(struct SsProblem *p);

/**
 * # Safety
 * `p` must be a live handle; `dim_x` and `dim_y` writable.
 */
enum SsStatus ss_problem_dims(const struct SsProblem *p, size_t *dim_x, size_t *dim_y);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SsStatus ss_problem_params(const struct SsProblem *p, struct SsParams *out);

/**
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum SsStatus ss_problem_condition(const struct SsProblem *p, struct SsCondition *out);

/**
 * Solves from the origin until the squared distance to the solution set
 * drops to `eps` times its initial value. `max_iters` bounds baseline
 * iterations and is ignored by the sliding method. `x`, `y` and `report`
 * may be NULL when not wanted.
 *
 * # Safety
 * `p` must be a live handle. Non-null `x` and `y` hold `x_len` and
 * `y_len` values, which must equal the problem dimensions.
 */
enum SsStatus ss_solve(const struct SsProblem *p,
                       uint32_t method,
                       double eps,
                       size_t max_iters,
                       double *x,
                       size_t x_len,
                       double *y,
                       size_t y_len,
                       struct SsReport *report);

/**
 * Norm of the saddle operator at `(x, y)`.
 *
 * # Safety
 * `p` must be a live handle, `x` and `y` hold `x_len` and `y_len` values,
 * `out` writable.
 */
enum SsStatus ss_kkt_residual(const struct SsProblem *p,
                              const double *x,
                              size_t x_len,
                              const double *y,
                              size_t y_len,
                              double *out);

#endif  /* SLIDING_SADDLE_H */
