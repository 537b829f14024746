#ifndef TSVHA_H
#define TSVHA_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TsvhaStatus {
  TSVHA_STATUS_OK = 0,
  TSVHA_STATUS_NULL_POINTER = 1,
  TSVHA_STATUS_DOMAIN = 2,
  TSVHA_STATUS_CONFIG = 3,
  TSVHA_STATUS_IO = 4,
  TSVHA_STATUS_RESOURCE = 5,
  TSVHA_STATUS_PANIC = 6,
  TSVHA_STATUS_INVALID_UTF8 = 7,
  TSVHA_STATUS_BUFFER_TOO_SMALL = 8,
} TsvhaStatus;

typedef enum TsvhaVariant {
  TSVHA_VARIANT_TS = 0,
  TSVHA_VARIANT_C1 = 1,
  TSVHA_VARIANT_C2 = 2,
} TsvhaVariant;

typedef enum TsvhaPolicyKind {
  TSVHA_POLICY_KIND_TS = 0,
  TSVHA_POLICY_KIND_C1 = 1,
  TSVHA_POLICY_KIND_C2 = 2,
  TSVHA_POLICY_KIND_C3 = 3,
  TSVHA_POLICY_KIND_GREEDY = 4,
  TSVHA_POLICY_KIND_STS = 5,
} TsvhaPolicyKind;

typedef enum TsvhaFamily {
  TSVHA_FAMILY_GAUSSIAN = 0,
  TSVHA_FAMILY_BETA = 1,
} TsvhaFamily;

/**
 * A parsed experiment ready to run.
 */
typedef struct TsvhaExperiment TsvhaExperiment;

/**
 * A policy, its per-arm state and its own random stream.
 */
typedef struct TsvhaPolicy TsvhaPolicy;

/**
 * Aggregated traces produced by [`tsvha_experiment_run`].
 */
typedef struct TsvhaResult TsvhaResult;

/**
 * One row of a cumulative-regret trace.
 */
typedef struct TsvhaTracePoint {
  uint64_t t;
  double mean;
  double std;
  double q10;
  double q25;
  double q50;
  double q75;
  double q90;
} TsvhaTracePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or an empty
 * string. Valid until the next library call on the same thread.
 */
const char *tsvha_last_error(void);

/**
 * Writes the `n` averaging-combiner weights to `out` (capacity `len`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum TsvhaStatus tsvha_c1_coefficients(size_t n, double *out, size_t len);

/**
 * Writes the `n` variance-inflating combiner weights to `out`.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum TsvhaStatus tsvha_c2_coefficients(size_t n, double *out, size_t len);

/**
 * Probability that a two-armed Gaussian policy plays arm 1.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum TsvhaStatus tsvha_selection_probability(double mu1,
                                             double mu2,
                                             uint64_t k1,
                                             uint64_t k2,
                                             enum TsvhaVariant variant,
                                             size_t agents,
                                             double *out);

/**
 * Finite-time regret bound for the suboptimal-arm gaps `gaps[0..n_gaps]`.
 *
 * # Safety
 * `gaps` must point to `n_gaps` doubles (may be null when `n_gaps` is 0);
 * `out` must be a valid pointer to a double.
 */
enum TsvhaStatus tsvha_theorem1_bound(double gamma,
                                      double beta,
                                      double epsilon,
                                      const double *gaps,
                                      size_t n_gaps,
                                      uint64_t horizon,
                                      double *out);

/**
 * Creates a policy over `arms` arms with its own seeded stream.
 * `agents` is used by C1 and C2, `epsilon` by STS; both are ignored otherwise.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle owned by
 * the caller.
 */
enum TsvhaStatus tsvha_policy_new(enum TsvhaPolicyKind kind,
                                  enum TsvhaFamily family,
                                  size_t agents,
                                  double epsilon,
                                  size_t arms,
                                  uint64_t seed,
                                  struct TsvhaPolicy **out);

/**
 * Chooses the arm to play this period.
 *
 * # Safety
 * `policy` must be a live handle; `arm` a valid pointer.
 */
enum TsvhaStatus tsvha_policy_select(struct TsvhaPolicy *policy, size_t *arm);

/**
 * Records the reward observed after playing `arm` and advances one period.
 *
 * # Safety
 * `policy` must be a live handle.
 */
enum TsvhaStatus tsvha_policy_update(struct TsvhaPolicy *policy, size_t arm, double reward);

/**
 * Number of plays of `arm` so far.
 *
 * # Safety
 * `policy` must be a live handle; `out` a valid pointer.
 */
enum TsvhaStatus tsvha_policy_plays(const struct TsvhaPolicy *policy, size_t arm, uint64_t *out);

/**
 * # Safety
 * `policy` must be null or a handle from [`tsvha_policy_new`] not yet freed.
 */
void tsvha_policy_free(struct TsvhaPolicy *policy);

/**
 * Parses a TOML experiment. Relative table paths resolve against
 * `base_dir`, which may be null for the current directory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string, `base_dir` null or one, and `out`
 * a valid pointer.
 */
enum TsvhaStatus tsvha_experiment_from_toml(const char *toml,
                                            const char *base_dir,
                                            struct TsvhaExperiment **out);

/**
 * Runs the experiment with at most `workers` threads (0 for the default).
 *
 * # Safety
 * `experiment` must be a live handle; `out` a valid pointer.
 */
enum TsvhaStatus tsvha_experiment_run(const struct TsvhaExperiment *experiment,
                                      size_t workers,
                                      struct TsvhaResult **out);

/**
 * # Safety
 * `experiment` must be null or a live handle.
 */
void tsvha_experiment_free(struct TsvhaExperiment *experiment);

/**
 * Number of policies in a result; 0 for a null handle.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t tsvha_result_policy_count(const struct TsvhaResult *result);

/**
 * Label of policy `index`, or null when out of range. Owned by the result.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
const char *tsvha_result_policy_label(const struct TsvhaResult *result, size_t index);

/**
 * Number of recorded periods in policy `index`'s trace, or 0.
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t tsvha_result_trace_len(const struct TsvhaResult *result, size_t index);

/**
 * Copies up to `len` trace rows of policy `index` into `out` and stores
 * the number written in `written`.
 *
 * # Safety
 * `result` must be a live handle, `out` must point to `len` writable rows
 * and `written` must be a valid pointer.
 */
enum TsvhaStatus tsvha_result_trace(const struct TsvhaResult *result,
                                    size_t index,
                                    struct TsvhaTracePoint *out,
                                    size_t len,
                                    size_t *written);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
void tsvha_result_free(struct TsvhaResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSVHA_H */
