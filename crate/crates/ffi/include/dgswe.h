#ifndef DGSWE_H
#define DGSWE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DgsweAlpha {
  DGSWE_ALPHA_LOCAL = 0,
  DGSWE_ALPHA_GLOBAL = 1,
} DgsweAlpha;

typedef enum DgsweCase {
  DGSWE_CASE_ADVECTION_SINE = 0,
  DGSWE_CASE_GEOSTROPHIC_ADJUSTMENT = 1,
  DGSWE_CASE_WILLIAMSON_TC2 = 2,
  DGSWE_CASE_WILLIAMSON_TC6 = 3,
} DgsweCase;

typedef enum DgsweStatus {
  DGSWE_STATUS_OK = 0,
  DGSWE_STATUS_NULL_POINTER = 1,
  DGSWE_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The solution became non-finite or lost positivity.
   */
  DGSWE_STATUS_DIVERGED = 3,
  DGSWE_STATUS_IO = 4,
  DGSWE_STATUS_PANIC = 5,
} DgsweStatus;

/**
 * Opaque solver handle.
 */
typedef struct DgsweSolver DgsweSolver;

/**
 * Run parameters. Exactly one of `dt` and `courant` must be positive.
 */
typedef struct DgsweConfig {
  enum DgsweCase case_id;
  uint32_t nx;
  uint32_t ny;
  uint32_t nz;
  uint32_t p;
  uint32_t rk;
  /**
   * Fixed time step in seconds, or `0`.
   */
  double dt;
  /**
   * Courant number, or `0`.
   */
  double courant;
  double t_final;
  enum DgsweAlpha alpha;
} DgsweConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next call on the same thread.
 */
const char *dgswe_last_error(void);

/**
 * Writes the default parameters of `case` into `out`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `DgsweConfig`.
 */
enum DgsweStatus dgswe_config_default(enum DgsweCase case_, struct DgsweConfig *out);

/**
 * Builds a solver with the projected initial state at `t = 0`.
 *
 * # Safety
 * `config` must be null or point to a valid `DgsweConfig`; `out` must be
 * null or point to writable memory for one pointer.
 */
enum DgsweStatus dgswe_solver_new(const struct DgsweConfig *config, struct DgsweSolver **out);

/**
 * Releases a solver. Null is ignored.
 *
 * # Safety
 * `solver` must be null or a handle from [`dgswe_solver_new`] that has not
 * been freed.
 */
void dgswe_solver_free(struct DgsweSolver *solver);

/**
 * Takes `n` steps of the configured size.
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
enum DgsweStatus dgswe_solver_step(struct DgsweSolver *solver, uint64_t n);

/**
 * Steps to time `t`, shortening the last step to land on it.
 *
 * # Safety
 * `solver` must be null or a live handle.
 */
enum DgsweStatus dgswe_solver_advance_to(struct DgsweSolver *solver, double t);

/**
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_time(const struct DgsweSolver *solver, double *out);

/**
 * Number of steps taken so far.
 *
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_steps(const struct DgsweSolver *solver, uint64_t *out);

/**
 * The configured time step in seconds.
 *
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_dt(const struct DgsweSolver *solver, double *out);

/**
 * Number of conserved variables.
 *
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_n_vars(const struct DgsweSolver *solver, uint32_t *out);

/**
 * Integral of variable `var` over the domain (`cos θ` weighted on the
 * sphere).
 *
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_mass(const struct DgsweSolver *solver, uint32_t var, double *out);

/**
 * L2 error of variable `var` against the exact solution. Fails with
 * `INVALID_ARGUMENT` for cases without one.
 *
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_l2_error(const struct DgsweSolver *solver, uint32_t var, double *out);

/**
 * Value of variable `var` at `(x, y)`; `(λ, θ)` in radians on the sphere.
 *
 * # Safety
 * `solver` must be null or a live handle; `out` null or writable.
 */
enum DgsweStatus dgswe_solver_sample(const struct DgsweSolver *solver,
                                     uint32_t var,
                                     double x,
                                     double y,
                                     double *out);

/**
 * Writes a field dump at the default resolution to `path` (UTF-8).
 *
 * # Safety
 * `solver` must be null or a live handle; `path` null or a NUL-terminated
 * string.
 */
enum DgsweStatus dgswe_solver_export(const struct DgsweSolver *solver, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DGSWE_H */
