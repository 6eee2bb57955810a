#ifndef QEWA_H
#define QEWA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QtStatus {
  QT_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QT_STATUS_NULL_POINTER = 1,
  /**
   * A tuning parameter is outside its domain.
   */
  QT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * An observation was rejected, e.g. NaN or infinite.
   */
  QT_STATUS_INVALID_INPUT = 3,
  /**
   * The estimator is still in its warmup phase.
   */
  QT_STATUS_NOT_READY = 4,
  /**
   * A numerical routine failed.
   */
  QT_STATUS_NUMERIC = 5,
  /**
   * Internal error; the handle involved should be freed.
   */
  QT_STATUS_PANIC = 6,
} QtStatus;

/**
 * Opaque drift detector.
 */
typedef struct QtDriftDetector QtDriftDetector;

/**
 * Opaque quantile (or mean) tracker.
 */
typedef struct QtEstimator QtEstimator;

typedef struct QtDriftConfig {
  double q;
  double threshold;
  uint64_t warmup_samples;
  double lambda;
  double gamma;
  size_t estimator_warmup;
  bool reset_on_event;
} QtDriftConfig;

typedef struct QtDriftEvent {
  /**
   * 1-based index of the triggering sample.
   */
  uint64_t sample_index;
  double quantile_estimate;
  double threshold;
} QtDriftEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of `status`.
 */
const char *qt_status_message(enum QtStatus status);

/**
 * Library version as a static, NUL-terminated string.
 */
const char *qt_version(void);

/**
 * Create a QEWA tracker for quantile level `q`.
 */
enum QtStatus qt_qewa_new(double q,
                          double lambda,
                          double gamma,
                          size_t warmup,
                          struct QtEstimator **out);

enum QtStatus qt_dumiqe_new(double q, double lambda, struct QtEstimator **out);

enum QtStatus qt_frugal_new(double q, double step, struct QtEstimator **out);

/**
 * Exponentially weighted mean; `qt_estimator_estimate` returns the mean.
 */
enum QtStatus qt_ewa_mean_new(double alpha, struct QtEstimator **out);

enum QtStatus qt_estimator_observe(struct QtEstimator *est, double x);

/**
 * Feed `len` values. Stops at the first rejected value; the values before
 * it have been consumed.
 */
enum QtStatus qt_estimator_observe_many(struct QtEstimator *est, const double *xs, size_t len);

/**
 * Current estimate, or `QT_STATUS_NOT_READY` during warmup.
 */
enum QtStatus qt_estimator_estimate(const struct QtEstimator *est, double *out);

/**
 * Number of accepted observations; 0 for a null handle.
 */
uint64_t qt_estimator_n_seen(const struct QtEstimator *est);

/**
 * Release a handle. Null is ignored.
 */
void qt_estimator_free(struct QtEstimator *est);

/**
 * Fill `out` with the default detector settings.
 */
enum QtStatus qt_drift_config_default(struct QtDriftConfig *out);

enum QtStatus qt_drift_new(const struct QtDriftConfig *config, struct QtDriftDetector **out);

/**
 * Feed one prediction error. `fired` is set to whether an event fired; if
 * it did and `event` is not null, the event is written there.
 */
enum QtStatus qt_drift_observe(struct QtDriftDetector *det,
                               double err,
                               bool *fired,
                               struct QtDriftEvent *event);

/**
 * Tracked error quantile, or `QT_STATUS_NOT_READY` during warmup.
 */
enum QtStatus qt_drift_estimate(const struct QtDriftDetector *det, double *out);

void qt_drift_free(struct QtDriftDetector *det);

enum QtStatus qt_normal_quantile(double q, double *out);

enum QtStatus qt_chi2_cdf(double x, double nu, double *out);

enum QtStatus qt_chi2_quantile(double q, double nu, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QEWA_H */
