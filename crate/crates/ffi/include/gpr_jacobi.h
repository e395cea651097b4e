#ifndef GPR_JACOBI_H
#define GPR_JACOBI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GjKernel {
  GJ_KERNEL_GAUSSIAN = 0,
  GJ_KERNEL_PERIODIC = 1,
  GJ_KERNEL_ADDITIVE = 2,
} GjKernel;

typedef enum GjProblem {
  GJ_PROBLEM_LAPLACE2D = 0,
  GJ_PROBLEM_CONV_DIFF3D = 1,
  GJ_PROBLEM_SMALL_DIFF3D = 2,
} GjProblem;

typedef enum GjStatus {
  GJ_STATUS_OK = 0,
  GJ_STATUS_NULL_POINTER = 1,
  GJ_STATUS_INVALID_ARGUMENT = 2,
  GJ_STATUS_DIMENSION_MISMATCH = 3,
  GJ_STATUS_NOT_CONVERGED = 4,
  GJ_STATUS_NUMERICAL_FAILURE = 5,
  GJ_STATUS_IO = 6,
  GJ_STATUS_PANIC = 7,
} GjStatus;

/**
 * Opaque fitted GP model.
 */
typedef struct GjModel GjModel;

/**
 * Opaque linear system.
 */
typedef struct GjSystem GjSystem;

typedef struct GjSolveReport {
  size_t iterations;
  bool converged;
  bool diverged;
  double final_rres;
  double omega;
} GjSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t gj_last_error_message(char *buf, size_t len);

/**
 * Builds benchmark problem `problem` on an `n`-point grid with default
 * coefficients.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by the
 * caller.
 */
enum GjStatus gj_system_build(enum GjProblem problem, size_t n, struct GjSystem **out);

/**
 * # Safety
 * `sys` must be null or a handle from [`gj_system_build`] not yet freed.
 */
void gj_system_free(struct GjSystem *sys);

/**
 * Number of unknowns, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be null or a live handle.
 */
size_t gj_system_dim(const struct GjSystem *sys);

/**
 * Weighted Jacobi from the default starting vector. If `x_out` is non-null
 * the final iterate is copied into it (`len` must equal the dimension).
 * Returns `GJ_STATUS_NOT_CONVERGED` when the run stopped without reaching
 * `tol`; the report is filled either way.
 *
 * # Safety
 * `sys` and `report` must be valid; `x_out` null or `len` writable doubles.
 */
enum GjStatus gj_solve(const struct GjSystem *sys,
                       double omega,
                       double tol,
                       size_t max_iter,
                       double *x_out,
                       size_t len,
                       struct GjSolveReport *report);

/**
 * `2 / (λ_min + λ_max)` of `D⁻¹A`.
 *
 * # Safety
 * `sys` and `omega_out` must be valid.
 */
enum GjStatus gj_spectral_omega(const struct GjSystem *sys, double *omega_out);

/**
 * Weight with the fewest iterations on the grid `lo, lo+step, …, hi`.
 *
 * # Safety
 * `sys`, `omega_out` and `iterations_out` must be valid.
 */
enum GjStatus gj_grid_search(const struct GjSystem *sys,
                             double lo,
                             double hi,
                             double step,
                             double tol,
                             size_t max_iter,
                             double *omega_out,
                             size_t *iterations_out);

/**
 * Fits a GP with optimized hyperparameters to `len` pairs `(sizes[i], omegas[i])`.
 *
 * # Safety
 * `sizes` and `omegas` must point to `len` values; `out` must be valid.
 */
enum GjStatus gj_model_fit(const size_t *sizes,
                           const double *omegas,
                           size_t len,
                           enum GjKernel kernel,
                           double jitter,
                           struct GjModel **out);

/**
 * Predicted weight and variance at grid size `n`.
 *
 * # Safety
 * `model`, `mean_out` and `variance_out` must be valid.
 */
enum GjStatus gj_model_predict(const struct GjModel *model,
                               size_t n,
                               double *mean_out,
                               double *variance_out);

/**
 * # Safety
 * `model` must be null or a handle from [`gj_model_fit`] not yet freed.
 */
void gj_model_free(struct GjModel *model);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* GPR_JACOBI_H */
