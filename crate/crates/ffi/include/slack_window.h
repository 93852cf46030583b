#ifndef SLACK_WINDOW_H
#define SLACK_WINDOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum SwStatus {
  SW_STATUS_OK = 0,
  SW_STATUS_NULL_POINTER = 1,
  SW_STATUS_INVALID_CONFIG = 2,
  SW_STATUS_OUT_OF_RANGE = 3,
  SW_STATUS_EMPTY = 4,
  SW_STATUS_UNDEFINED = 5,
  SW_STATUS_OVERFLOW = 6,
  SW_STATUS_PANIC = 7,
} SwStatus;

/**
 * Which summing sketch to build.
 */
typedef enum SwSumMode {
  SW_SUM_MODE_EXACT = 0,
  SW_SUM_MODE_ADDITIVE = 1,
  SW_SUM_MODE_MULT = 2,
  SW_SUM_MODE_MULT_COMPACT = 3,
} SwSumMode;

/**
 * Sketch kinds for `sw_space_total_bits`.
 */
typedef enum SwSpaceMode {
  SW_SPACE_MODE_EXACT = 0,
  SW_SPACE_MODE_ADDITIVE = 1,
  SW_SPACE_MODE_MULT = 2,
  SW_SPACE_MODE_MULT_COMPACT = 3,
  SW_SPACE_MODE_MAX = 4,
  SW_SPACE_MODE_DISTINCT = 5,
} SwSpaceMode;

/**
 * Opaque slack maximum.
 */
typedef struct SwMax SwMax;

/**
 * Opaque summing sketch.
 */
typedef struct SwSketch SwSketch;

/**
 * Opaque slack HyperLogLog.
 */
typedef struct SwSlackHll SwSlackHll;

/**
 * Opaque slack standard deviation.
 */
typedef struct SwStdDevSketch SwStdDevSketch;

/**
 * Window geometry. `eps_den == 0` means no epsilon.
 */
typedef struct SwConfig {
  uint64_t window;
  uint64_t inv_tau;
  uint64_t range;
  uint64_t eps_num;
  uint64_t eps_den;
  bool signed_values;
} SwConfig;

/**
 * A query answer covering the last `covered = W + slack` elements.
 */
typedef struct SwEstimate {
  double estimate;
  uint64_t slack;
  uint64_t covered;
} SwEstimate;

typedef struct SwStdDev {
  double mean;
  double sigma;
  uint64_t slack;
  uint64_t covered;
  bool clamped;
} SwStdDev;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of `status`.
 */
const char *sw_status_str(enum SwStatus status);

/**
 * # Safety
 * `cfg` must point to a valid `SwConfig`; `out` must be writable.
 */
enum SwStatus sw_sketch_new(const struct SwConfig *cfg, enum SwSumMode mode, struct SwSketch **out);

/**
 * # Safety
 * `s` must come from `sw_sketch_new`.
 */
enum SwStatus sw_sketch_update(struct SwSketch *s, int64_t x);

/**
 * # Safety
 * `s` must come from `sw_sketch_new`; `out` must be writable.
 */
enum SwStatus sw_sketch_output(struct SwSketch *s, struct SwEstimate *out);

/**
 * # Safety
 * `s` must come from `sw_sketch_new` and not be used afterwards. Null is ignored.
 */
void sw_sketch_free(struct SwSketch *s);

/**
 * # Safety
 * `cfg` must point to a valid `SwConfig`; `out` must be writable.
 */
enum SwStatus sw_max_new(const struct SwConfig *cfg, struct SwMax **out);

/**
 * # Safety
 * `m` must come from `sw_max_new`.
 */
enum SwStatus sw_max_update(struct SwMax *m, int64_t x);

/**
 * # Safety
 * `m` must come from `sw_max_new`; `out` must be writable.
 */
enum SwStatus sw_max_output(struct SwMax *m, int64_t *out, uint64_t *slack);

/**
 * # Safety
 * `m` must come from `sw_max_new` and not be used afterwards. Null is ignored.
 */
void sw_max_free(struct SwMax *m);

/**
 * # Safety
 * `cfg` must point to a valid `SwConfig`; `out` must be writable.
 */
enum SwStatus sw_stddev_new(const struct SwConfig *cfg,
                            enum SwSumMode inner,
                            struct SwStdDevSketch **out);

/**
 * # Safety
 * `s` must come from `sw_stddev_new`.
 */
enum SwStatus sw_stddev_update(struct SwStdDevSketch *s, int64_t x);

/**
 * # Safety
 * `s` must come from `sw_stddev_new`; `out` must be writable.
 */
enum SwStatus sw_stddev_output(struct SwStdDevSketch *s, struct SwStdDev *out);

/**
 * # Safety
 * `s` must come from `sw_stddev_new` and not be used afterwards. Null is ignored.
 */
void sw_stddev_free(struct SwStdDevSketch *s);

/**
 * # Safety
 * `cfg` must point to a valid `SwConfig`; `out` must be writable.
 */
enum SwStatus sw_shll_new(const struct SwConfig *cfg,
                          uint32_t bucket_bits,
                          uint64_t seed,
                          struct SwSlackHll **out);

/**
 * Adds the id `data[0..len]`.
 *
 * # Safety
 * `h` must come from `sw_shll_new`; `data` must point to `len` readable bytes (may be null when `len == 0`).
 */
enum SwStatus sw_shll_update(struct SwSlackHll *h,
                             const uint8_t *data,
                             size_t len);

/**
 * # Safety
 * `h` must come from `sw_shll_new`; `out` must be writable.
 */
enum SwStatus sw_shll_output(struct SwSlackHll *h, struct SwEstimate *out);

/**
 * # Safety
 * `h` must come from `sw_shll_new` and not be used afterwards. Null is ignored.
 */
void sw_shll_free(struct SwSlackHll *h);

/**
 * Total state bits of the sketch `mode` for `cfg`. `bucket_bits` is read only for `DISTINCT`.
 *
 * # Safety
 * `cfg` must point to a valid `SwConfig`; `out` must be writable.
 */
enum SwStatus sw_space_total_bits(const struct SwConfig *cfg,
                                  enum SwSpaceMode mode,
                                  uint32_t bucket_bits,
                                  uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLACK_WINDOW_H */
