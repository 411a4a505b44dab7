#ifndef PEER_ADJOINT_H
#define PEER_ADJOINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  PA_STATUS_OK = 0,
  PA_STATUS_NULL_POINTER = 1,
  PA_STATUS_INVALID_ARGUMENT = 2,
  PA_STATUS_UNKNOWN_NAME = 3,
  PA_STATUS_PARSE = 4,
  PA_STATUS_NUMERICAL = 5,
  PA_STATUS_NO_CONVERGENCE = 6,
  PA_STATUS_OUT_OF_RANGE = 7,
  PA_STATUS_IO = 8,
  PA_STATUS_PANIC = 9,
} PaStatus;

/**
 * Boundary value problem of the eliminated optimality system.
 */
typedef struct PaProblem PaProblem;

/**
 * Converged discrete state and adjoint.
 */
typedef struct PaSolution PaSolution;

/**
 * Method coefficients (start, standard and end sets).
 */
typedef struct PaSuite PaSuite;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (truncated,
 * always NUL-terminated when `cap > 0`) and returns its full length in bytes
 * excluding the terminator.
 *
 * # Safety
 * `buf` is null or valid for `cap` byte writes.
 */
size_t pa_last_error(char *buf, size_t cap);

/**
 * Built-in method by name (`BDF3o22`, `BDF3o32`, `PEER3o32w`).
 *
 * # Safety
 * `name` is a NUL-terminated string; `out` is valid for writes.
 */
PaStatus pa_suite_builtin(const char *name, PaSuite **out);

/**
 * Method read from a coefficient file.
 *
 * # Safety
 * `path` is a NUL-terminated string; `out` is valid for writes.
 */
PaStatus pa_suite_from_file(const char *path, PaSuite **out);

/**
 * # Safety
 * `suite` is null or a handle from this library; `stages` is valid for writes.
 */
PaStatus pa_suite_stages(const PaSuite *suite, size_t *stages);

/**
 * A(α) angle in degrees of the standard set, from `n_theta` samples.
 *
 * # Safety
 * `suite` is a handle from this library; `degrees` is valid for writes.
 */
PaStatus pa_suite_alpha_angle(const PaSuite *suite, size_t n_theta, double *degrees);

/**
 * # Safety
 * `suite` is null or a handle from this library not yet freed.
 */
void pa_suite_free(PaSuite *suite);

/**
 * Benchmark problem by name (`rayleigh`, `van_der_pol`) with defaults.
 *
 * # Safety
 * `name` is a NUL-terminated string; `out` is valid for writes.
 */
PaStatus pa_problem_by_name(const char *name, PaProblem **out);

/**
 * Van der Pol problem with stiffness parameter `epsilon > 0`.
 *
 * # Safety
 * `out` is valid for writes.
 */
PaStatus pa_problem_van_der_pol(double epsilon, PaProblem **out);

/**
 * # Safety
 * `problem` is a handle from this library; `dim` is valid for writes.
 */
PaStatus pa_problem_dim(const PaProblem *problem, size_t *dim);

/**
 * # Safety
 * `problem` is null or a handle from this library not yet freed.
 */
void pa_problem_free(PaProblem *problem);

/**
 * Solves the coupled forward/adjoint system on `n + 1` steps with the
 * default solver options.
 *
 * # Safety
 * `suite`, `problem` are handles from this library; `out` is valid for writes.
 */
PaStatus pa_solve(const PaSuite *suite, const PaProblem *problem, size_t n, PaSolution **out);

/**
 * Number of steps (`N + 1`), stages and state dimension.
 *
 * # Safety
 * `solution` is a handle from this library; the out pointers are valid for
 * writes.
 */
PaStatus pa_solution_shape(const PaSolution *solution, size_t *steps, size_t *stages, size_t *dim);

/**
 * State at stage `stage` of step `step`; `time` (may be null) receives the
 * stage time.
 *
 * # Safety
 * `solution` is a handle from this library; `values` is valid for `len`
 * writes; `time` is null or valid for writes.
 */
PaStatus pa_solution_state(const PaSolution *solution,
                           size_t step,
                           size_t stage,
                           double *time,
                           double *values,
                           size_t len);

/**
 * Adjoint at stage `stage` of step `step`.
 *
 * # Safety
 * As [`pa_solution_state`].
 */
PaStatus pa_solution_adjoint(const PaSolution *solution,
                             size_t step,
                             size_t stage,
                             double *time,
                             double *values,
                             size_t len);

/**
 * Final state `y_h(T)` and initial adjoint `p_h(0)`; each buffer holds `len`
 * values.
 *
 * # Safety
 * `solution` is a handle from this library; both buffers are valid for
 * `len` writes.
 */
PaStatus pa_solution_boundary(const PaSolution *solution,
                              double *y_final,
                              double *p_initial,
                              size_t len);

/**
 * Largest residual over all equation groups, re-evaluated from the stored
 * solution.
 *
 * # Safety
 * `suite`, `problem`, `solution` are handles from this library (the same
 * suite and problem used to solve); `residual` is valid for writes.
 */
PaStatus pa_solution_residual(const PaSuite *suite,
                              const PaProblem *problem,
                              const PaSolution *solution,
                              double *residual);

/**
 * # Safety
 * `solution` is null or a handle from this library not yet freed.
 */
void pa_solution_free(PaSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEER_ADJOINT_H */
