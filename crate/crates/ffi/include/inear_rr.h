#ifndef INEAR_RR_H
#define INEAR_RR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InearStatus {
  INEAR_STATUS_OK = 0,
  INEAR_STATUS_NULL_POINTER = 1,
  INEAR_STATUS_INVALID_UTF8 = 2,
  INEAR_STATUS_PARAMETER = 3,
  INEAR_STATUS_INPUT = 4,
  INEAR_STATUS_CONFIG = 5,
  INEAR_STATUS_MODEL = 6,
  INEAR_STATUS_TEMPLATE = 7,
  INEAR_STATUS_LOW_QUALITY = 8,
  INEAR_STATUS_OUT_OF_RANGE = 9,
  INEAR_STATUS_INTERNAL = 10,
} InearStatus;

typedef enum InearPipeline {
  INEAR_PIPELINE_NONE = -1,
  INEAR_PIPELINE_RSA = 0,
  INEAR_PIPELINE_LRC = 1,
} InearPipeline;

typedef enum InearActivity {
  INEAR_ACTIVITY_SEDENTARY = 0,
  INEAR_ACTIVITY_ACTIVE_LOW = 1,
  INEAR_ACTIVITY_ACTIVE_HIGH = 2,
  INEAR_ACTIVITY_UNDETERMINED = 3,
} InearActivity;

/**
 * Opaque configuration handle.
 */
typedef struct InearConfig InearConfig;

/**
 * Opaque estimator handle.
 */
typedef struct InearEngine InearEngine;

/**
 * Opaque list of window results.
 */
typedef struct InearResults InearResults;

/**
 * One window's result. `rr_bpm` is NaN when `valid` is 0.
 */
typedef struct InearEstimate {
  double window_start_s;
  double window_end_s;
  enum InearPipeline pipeline;
  enum InearActivity activity;
  double rr_bpm;
  uint8_t valid;
} InearEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *inear_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *inear_last_error(void);

/**
 * A configuration holding the defaults.
 */
struct InearConfig *inear_config_new(void);

/**
 * Reads a `key = value` configuration file into `*out`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum InearStatus inear_config_load(const char *path, struct InearConfig **out);

/**
 * Sets one configuration key; the whole configuration is validated when
 * an engine is built from it.
 *
 * # Safety
 * `cfg` must come from this library; `key` and `value` must be
 * NUL-terminated strings.
 */
enum InearStatus inear_config_set(struct InearConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must come from this library or be null, and not be used afterwards.
 */
void inear_config_free(struct InearConfig *cfg);

/**
 * Builds an engine, loading any model or template files the configuration
 * names. `cfg` may be null for the defaults.
 *
 * # Safety
 * `cfg` must come from this library or be null; `out` must be valid.
 */
enum InearStatus inear_engine_new(const struct InearConfig *cfg, struct InearEngine **out);

/**
 * # Safety
 * `engine` must come from this library or be null, and not be used afterwards.
 */
void inear_engine_free(struct InearEngine *engine);

/**
 * Estimates every window of `n_samples` samples per channel. `right` may be
 * null for a single channel.
 *
 * # Safety
 * `left` (and `right` when non-null) must point to `n_samples` floats.
 */
enum InearStatus inear_engine_estimate(const struct InearEngine *engine,
                                       const float *left,
                                       const float *right,
                                       uintptr_t n_samples,
                                       double sample_rate,
                                       struct InearResults **out);

/**
 * Reads a WAV file and estimates every window.
 *
 * # Safety
 * `engine` must come from this library, `path` must be NUL-terminated and
 * `out` valid.
 */
enum InearStatus inear_engine_estimate_file(const struct InearEngine *engine,
                                            const char *path,
                                            struct InearResults **out);

/**
 * Number of windows in `results`; 0 for null.
 *
 * # Safety
 * `results` must come from this library or be null.
 */
uintptr_t inear_results_len(const struct InearResults *results);

/**
 * Copies window `index` into `*out`.
 *
 * # Safety
 * `results` must come from this library; `out` must be valid.
 */
enum InearStatus inear_results_get(const struct InearResults *results,
                                   uintptr_t index,
                                   struct InearEstimate *out);

/**
 * # Safety
 * `results` must come from this library or be null, and not be used afterwards.
 */
void inear_results_free(struct InearResults *results);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INEAR_RR_H */
