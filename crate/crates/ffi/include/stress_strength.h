#ifndef STRESS_STRENGTH_H
#define STRESS_STRENGTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  /**
   * Bad argument, size mismatch or invalid scheme.
   */
  SS_STATUS_INVALID_ARGUMENT = 2,
  SS_STATUS_ZERO_FAILURES = 3,
  SS_STATUS_DEGENERATE_DATA = 4,
  SS_STATUS_NON_CONVERGENCE = 5,
  /**
   * The approximate likelihood equations have no valid root.
   */
  SS_STATUS_AMLE_FAILURE = 6,
  /**
   * Singular or indefinite information, or a nonpositive variance.
   */
  SS_STATUS_INFORMATION_FAILURE = 7,
  SS_STATUS_BOOTSTRAP_FAILURE = 8,
  SS_STATUS_IMPROPER_POSTERIOR = 9,
  SS_STATUS_INSUFFICIENT_DRAWS = 10,
  SS_STATUS_INDEX_OUT_OF_RANGE = 11,
  SS_STATUS_PANIC = 12,
} SsStatus;

/**
 * Which point estimate an asymptotic interval is centred on.
 */
typedef enum SsEstimator {
  SS_ESTIMATOR_MLE = 0,
  SS_ESTIMATOR_AMLE = 1,
} SsEstimator;

/**
 * Paired strength and stress samples.
 */
typedef struct SsData SsData;

/**
 * Post burn-in draws of one chain.
 */
typedef struct SsDraws SsDraws;

/**
 * Censoring plan: stop at the `r`-th failure or at `time_limit`, whichever
 * comes first. Pass `INFINITY` for plain failure censoring.
 */
typedef struct SsScheme {
  size_t n;
  size_t r;
  double time_limit;
} SsScheme;

typedef struct SsFit {
  double alpha;
  double theta1;
  double theta2;
  double r;
  /**
   * Shape iterations; zero for the closed-form estimator.
   */
  size_t iterations;
} SsFit;

typedef struct SsInterval {
  double lower;
  double upper;
  double level;
  /**
   * An endpoint was clipped to [0, 1].
   */
  bool clamped;
} SsInterval;

/**
 * Gamma prior on the shape and inverse gamma priors on the scales, as
 * (shape, rate) pairs: `a1, b1` for the strength scale, `a2, b2` for the
 * stress scale, `a3, b3` for the shape.
 */
typedef struct SsPrior {
  double a1;
  double b1;
  double a2;
  double b2;
  double a3;
  double b3;
} SsPrior;

typedef struct SsDraw {
  double alpha;
  double theta1;
  double theta2;
  double r;
} SsDraw;

typedef struct SsSummary {
  double mean;
  double variance;
  double acceptance_rate;
} SsSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Censor two complete samples of sizes `scheme_x.n` and `scheme_y.n`.
 *
 * # Safety
 * `x` and `y` must point to `nx` and `ny` readable values; `out` must be
 * writable.
 */
enum SsStatus ss_data_from_raw(const double *x,
                               size_t nx,
                               struct SsScheme scheme_x,
                               const double *y,
                               size_t ny,
                               struct SsScheme scheme_y,
                               struct SsData **out);

/**
 * Build samples from the failures already observed under each plan.
 *
 * # Safety
 * As for [`ss_data_from_raw`], with `dx` and `dy` observed failures.
 */
enum SsStatus ss_data_from_censored(const double *x,
                                    size_t dx,
                                    struct SsScheme scheme_x,
                                    const double *y,
                                    size_t dy,
                                    struct SsScheme scheme_y,
                                    struct SsData **out);

/**
 * Observed failure counts of the strength and stress samples.
 *
 * # Safety
 * `data` must come from one of the constructors; outputs must be writable.
 */
enum SsStatus ss_data_failures(const struct SsData *data, size_t *dx, size_t *dy);

/**
 * # Safety
 * `data` must be null or a handle not yet freed.
 */
void ss_data_free(struct SsData *data);

/**
 * Maximum likelihood fit with default solver settings.
 *
 * # Safety
 * `data` must be a live handle; `out` must be writable.
 */
enum SsStatus ss_mle_fit(const struct SsData *data, struct SsFit *out);

/**
 * Closed-form approximate maximum likelihood fit.
 *
 * # Safety
 * As for [`ss_mle_fit`].
 */
enum SsStatus ss_amle_fit(const struct SsData *data, struct SsFit *out);

/**
 * Delta-method interval of level `1 - gamma` around the chosen estimate.
 *
 * # Safety
 * As for [`ss_mle_fit`].
 */
enum SsStatus ss_asymptotic_ci(const struct SsData *data,
                               enum SsEstimator estimator,
                               double gamma,
                               struct SsInterval *out);

/**
 * Percentile bootstrap interval from `nboot` resamples.
 *
 * # Safety
 * As for [`ss_mle_fit`].
 */
enum SsStatus ss_boot_p_ci(const struct SsData *data,
                           size_t nboot,
                           double gamma,
                           uint64_t seed,
                           struct SsInterval *out);

/**
 * Studentized bootstrap interval from `nboot` resamples.
 *
 * # Safety
 * As for [`ss_mle_fit`].
 */
enum SsStatus ss_boot_t_ci(const struct SsData *data,
                           size_t nboot,
                           double gamma,
                           uint64_t seed,
                           struct SsInterval *out);

/**
 * Run one chain of `m` kept draws after `burn_in` discarded sweeps,
 * started at the maximum likelihood fit. A null `prior` means the
 * noninformative prior.
 *
 * # Safety
 * `data` must be a live handle, `prior` null or readable, `out` writable.
 */
enum SsStatus ss_gibbs_chain(const struct SsData *data,
                             const struct SsPrior *prior,
                             size_t m,
                             size_t burn_in,
                             double proposal_sd,
                             uint64_t seed,
                             struct SsDraws **out);

/**
 * Number of kept draws, or zero for a null handle.
 *
 * # Safety
 * `draws` must be null or a live handle.
 */
size_t ss_draws_len(const struct SsDraws *draws);

/**
 * # Safety
 * `draws` must be a live handle; `out` must be writable.
 */
enum SsStatus ss_draws_get(const struct SsDraws *draws, size_t index, struct SsDraw *out);

/**
 * Posterior mean and variance of the reliability.
 *
 * # Safety
 * As for [`ss_draws_get`].
 */
enum SsStatus ss_draws_summary(const struct SsDraws *draws, struct SsSummary *out);

/**
 * Equal-tailed credible interval of level `1 - gamma`.
 *
 * # Safety
 * As for [`ss_draws_get`].
 */
enum SsStatus ss_draws_credible(const struct SsDraws *draws, double gamma, struct SsInterval *out);

/**
 * Shortest interval holding a `1 - gamma` share of the draws.
 *
 * # Safety
 * As for [`ss_draws_get`].
 */
enum SsStatus ss_draws_hpd(const struct SsDraws *draws, double gamma, struct SsInterval *out);

/**
 * # Safety
 * `draws` must be null or a handle not yet freed.
 */
void ss_draws_free(struct SsDraws *draws);

/**
 * Message for the last failed call on this thread, or null after a
 * successful one. The pointer stays valid until the next call on the same
 * thread.
 */
const char *ss_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *ss_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STRESS_STRENGTH_H */
