#ifndef GAUSSPSL_H
#define GAUSSPSL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GpslStatus {
  GPSL_STATUS_OK = 0,
  GPSL_STATUS_NULL_POINTER = 1,
  GPSL_STATUS_INVALID_ARGUMENT = 2,
  GPSL_STATUS_TRAINING = 3,
  GPSL_STATUS_PANIC = 4,
} GpslStatus;

/**
 * Benchmark problem handle.
 */
typedef struct GpslProblem GpslProblem;

/**
 * Training session handle. Owns its own copy of the problem.
 */
typedef struct GpslTrainer GpslTrainer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *gpsl_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gpsl_version(void);

/**
 * Creates a problem by name (`"ZDT3"`, `"DTLZ5"`, `"DTLZ7"`, `"RE21"`,
 * `"RE36"`, `"RE37"`; case-insensitive).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum GpslStatus gpsl_problem_new(const char *name, struct GpslProblem **out);

/**
 * # Safety
 * `problem` must come from [`gpsl_problem_new`] and not be used afterwards.
 * Null is ignored.
 */
void gpsl_problem_free(struct GpslProblem *problem);

/**
 * Objective count `k` and decision dimension `n`.
 *
 * # Safety
 * `problem` must be a live handle; `k` and `n` writable pointers.
 */
enum GpslStatus gpsl_problem_dims(const struct GpslProblem *problem, size_t *k, size_t *n);

/**
 * Evaluates `x` (length `n`) into `objectives` (length `k`).
 *
 * # Safety
 * `x` must point to `n_len` readable doubles and `objectives` to `k_len`
 * writable doubles.
 */
enum GpslStatus gpsl_problem_evaluate(const struct GpslProblem *problem,
                                      const double *x,
                                      size_t n_len,
                                      double *objectives,
                                      size_t k_len);

/**
 * Starts a training session. `config_toml` holds training settings in the
 * same TOML form as the `[train]` table of an experiment file; null means
 * defaults.
 *
 * # Safety
 * `problem` must be a live handle, `config_toml` null or NUL-terminated,
 * `out` writable.
 */
enum GpslStatus gpsl_trainer_new(const struct GpslProblem *problem,
                                 const char *config_toml,
                                 struct GpslTrainer **out);

/**
 * # Safety
 * `trainer` must come from [`gpsl_trainer_new`] and not be used afterwards.
 * Null is ignored.
 */
void gpsl_trainer_free(struct GpslTrainer *trainer);

/**
 * One optimizer step; writes the batch loss to `loss` when non-null.
 *
 * # Safety
 * `trainer` must be a live handle; `loss` null or writable.
 */
enum GpslStatus gpsl_trainer_step(struct GpslTrainer *trainer, double *loss);

/**
 * Completed iterations, or 0 for a null handle.
 *
 * # Safety
 * `trainer` must be null or a live handle.
 */
size_t gpsl_trainer_iteration(const struct GpslTrainer *trainer);

/**
 * Live Gaussian subspaces (0 for plain models or a null handle).
 *
 * # Safety
 * `trainer` must be null or a live handle.
 */
size_t gpsl_trainer_subspace_count(const struct GpslTrainer *trainer);

/**
 * Decisions for `count` preferences. `prefs` is row-major `count × k`,
 * `decisions` row-major `count × n`.
 *
 * # Safety
 * `prefs` must hold `count * k` readable doubles and `decisions`
 * `count * n` writable doubles.
 */
enum GpslStatus gpsl_trainer_predict(const struct GpslTrainer *trainer,
                                     const double *prefs,
                                     size_t count,
                                     double *decisions);

/**
 * Exact hypervolume of `count` points of dimension `k` (2 or 3), row-major,
 * against `reference`.
 *
 * # Safety
 * `points` must hold `count * k` readable doubles, `reference` `k`, and
 * `out` must be writable.
 */
enum GpslStatus gpsl_hypervolume(const double *points,
                                 size_t count,
                                 size_t k,
                                 const double *reference,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAUSSPSL_H */
