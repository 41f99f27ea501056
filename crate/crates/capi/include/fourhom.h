#ifndef FOURHOM_H
#define FOURHOM_H

/* Generated by cbindgen from fourhom-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum FhStatus {
  /**
   * The call succeeded.
   */
  FH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FH_STATUS_NULL_POINTER = 1,
  /**
   * Malformed input: configuration JSON, pattern name, parameter ranges.
   */
  FH_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The solver failed hard (non-finite iterates or inconsistent state).
   * Plain non-convergence is not an error; check `fh_solution_converged`.
   */
  FH_STATUS_SOLVER = 3,
  /**
   * A filesystem operation inside the library failed.
   */
  FH_STATUS_IO = 4,
  /**
   * A caller-supplied buffer is shorter than the data it must receive.
   */
  FH_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  FH_STATUS_PANIC = 6,
} FhStatus;

/**
 * Opaque handle to a finished solve.
 *
 * Created by [`fh_solve`], released by [`fh_solution_free`]. A handle is
 * immutable; it is safe to read from multiple threads, but creation and
 * destruction must not race with reads.
 */
typedef struct FhSolution FhSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; never fails, never
 * needs freeing.
 */
const char *fh_version(void);

/**
 * Message of the most recent failure on the calling thread, or null when no
 * failure has been recorded. The pointer is owned by the library and stays
 * valid until the next `fh_*` call on the same thread; do not free it.
 */
const char *fh_last_error(void);

/**
 * Solve the periodic homogenization problem described by a configuration
 * document on the given frequency pattern.
 *
 * `config_json` is the same JSON schema the CLI accepts (geometry, grid,
 * material, macro_strain, tolerances, ...); its `patterns` / `r_values`
 * entries are ignored here in favor of the explicit arguments. `pattern` is
 * `"full"`, `"radial"` or `"adapted"`; `r_percent` is the percentage of
 * retained frequencies and is ignored for `"full"`.
 *
 * On success writes a new handle to `*out` and returns `FH_STATUS_OK`. The
 * handle must be released with [`fh_solution_free`]. Exhausting the
 * iteration budget still succeeds; inspect [`fh_solution_converged`].
 *
 * # Safety
 * `config_json` and `pattern` must be NUL-terminated strings and `out` must
 * point to writable storage for one pointer, all valid for the call.
 */
enum FhStatus fh_solve(const char *config_json,
                       const char *pattern,
                       double r_percent,
                       struct FhSolution **out);

/**
 * Release a handle obtained from [`fh_solve`]. Null is a no-op.
 *
 * # Safety
 * `sol` must be null or a pointer returned by [`fh_solve`] that has not been
 * freed yet; it must not be used afterwards.
 */
void fh_solution_free(struct FhSolution *sol);

/**
 * Spatial dimension of the solve (2 or 3), or 0 for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
uintptr_t fh_solution_dim(const struct FhSolution *sol);

/**
 * Write the per-axis cell counts into `out` (one entry per dimension).
 * `len` is the capacity of `out` in elements.
 *
 * # Safety
 * `sol` must be null or a live handle; `out` must point to `len` writable
 * `size_t` slots.
 */
enum FhStatus fh_solution_dims(const struct FhSolution *sol, uintptr_t *out, uintptr_t len);

/**
 * Total number of grid cells, or 0 for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
uintptr_t fh_solution_cells(const struct FhSolution *sol);

/**
 * Number of symmetric-tensor components per cell (3 in 2-D, 6 in 3-D), or 0
 * for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
uintptr_t fh_solution_components(const struct FhSolution *sol);

/**
 * Total fixed-point iterations across all load steps, or 0 for a null
 * handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
uintptr_t fh_solution_iterations(const struct FhSolution *sol);

/**
 * Whether every load step met the tolerance within the iteration budget.
 * False for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
bool fh_solution_converged(const struct FhSolution *sol);

/**
 * Residual at the end of the last executed load step; NaN for a null
 * handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
double fh_solution_residual(const struct FhSolution *sol);

/**
 * Number of retained frequencies of the mask the solve ran on, or 0 for a
 * null handle.
 *
 * # Safety
 * `sol` must be null or a live handle from [`fh_solve`].
 */
uintptr_t fh_solution_mask_len(const struct FhSolution *sol);

/**
 * Copy the strain field into `out` (`cells * components` elements, layout
 * as described in the crate docs). `len` is the capacity of `out`.
 *
 * # Safety
 * `sol` must be null or a live handle; `out` must point to `len` writable
 * doubles.
 */
enum FhStatus fh_solution_strain(const struct FhSolution *sol, double *out, uintptr_t len);

/**
 * Copy the stress field into `out` (`cells * components` elements). `len`
 * is the capacity of `out`.
 *
 * # Safety
 * `sol` must be null or a live handle; `out` must point to `len` writable
 * doubles.
 */
enum FhStatus fh_solution_stress(const struct FhSolution *sol, double *out, uintptr_t len);

/**
 * Copy the volume-averaged stress into `out` (`components` elements). `len`
 * is the capacity of `out`.
 *
 * # Safety
 * `sol` must be null or a live handle; `out` must point to `len` writable
 * doubles.
 */
enum FhStatus fh_solution_macro_stress(const struct FhSolution *sol, double *out, uintptr_t len);

/**
 * Relative stress errors of `sol` against `reference` on the same grid:
 * macroscopic (volume-averaged stress) into `*out_macro` and microscopic
 * (mean pointwise) into `*out_micro`. Either output pointer may be null to
 * skip that metric.
 *
 * # Safety
 * `sol` and `reference` must be live handles; `out_macro` / `out_micro`
 * must each be null or point to a writable double.
 */
enum FhStatus fh_compare(const struct FhSolution *sol,
                         const struct FhSolution *reference,
                         double *out_macro,
                         double *out_micro);

/**
 * Build the frequency mask a solve would use and return its text form (a
 * commented header plus one centered index per line) as a newly allocated
 * string in `*out`. Free it with [`fh_string_free`].
 *
 * # Safety
 * `config_json` and `pattern` must be NUL-terminated strings and `out` must
 * point to writable storage for one pointer, all valid for the call.
 */
enum FhStatus fh_mask_text(const char *config_json,
                           const char *pattern,
                           double r_percent,
                           char **out);

/**
 * Free a string returned by [`fh_mask_text`]. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a pointer returned by [`fh_mask_text`] that has not
 * been freed yet.
 */
void fh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FOURHOM_H */
