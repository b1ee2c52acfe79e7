#ifndef LOBSCALE_H
#define LOBSCALE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LobStatus {
  LOB_STATUS_OK = 0,
  LOB_STATUS_NULL_POINTER = 1,
  LOB_STATUS_INVALID_ARGUMENT = 2,
  LOB_STATUS_INSUFFICIENT_DATA = 3,
  LOB_STATUS_ZERO_VARIANCE = 4,
  LOB_STATUS_EMBEDDING_FAILURE = 5,
  LOB_STATUS_PANIC = 6,
} LobStatus;

typedef enum LobSignal {
  LOB_SIGNAL_WHITE = 0,
  LOB_SIGNAL_INTEGRATED = 1,
  LOB_SIGNAL_FGN = 2,
} LobSignal;

/**
 * Opaque fluctuation curve.
 */
typedef struct LobCurve LobCurve;

typedef struct LobFit {
  double alpha;
  double intercept;
  double r_squared;
  double stderr_alpha;
  size_t n_points;
} LobFit;

typedef struct LobCorrelation {
  double r;
  double r_critical;
  size_t n;
  bool significant_99;
} LobCorrelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library from the same thread.
 */
const char *lob_last_error(void);

/**
 * Mean-centred cumulative sum of `x` written to `out` (both length `n`).
 *
 * # Safety
 * `x` and `out` must each hold `n` values.
 */
enum LobStatus lob_profile(const double *x, size_t n, double *out);

/**
 * DFA of `x` at the given scales, or the default grid when `n_scales` is 0.
 *
 * # Safety
 * `x` must hold `n` values, `scales` `n_scales` values, and `out` must be
 * a valid pointer. The returned curve is owned by the caller.
 */
enum LobStatus lob_fluctuation(const double *x,
                               size_t n,
                               const size_t *scales,
                               size_t n_scales,
                               uint32_t order,
                               bool both_ends,
                               struct LobCurve **out);

/**
 * # Safety
 * `curve` must be null or a handle from `lob_fluctuation`.
 */
size_t lob_curve_len(const struct LobCurve *curve);

/**
 * Scale and fluctuation at position `i`.
 *
 * # Safety
 * `curve` must be a live handle; `scale` and `fluctuation` valid pointers.
 */
enum LobStatus lob_curve_get(const struct LobCurve *curve,
                             size_t i,
                             size_t *scale,
                             double *fluctuation);

/**
 * Set the average daily event count used for normalized scales.
 *
 * # Safety
 * `curve` must be a live handle.
 */
enum LobStatus lob_curve_set_normalization(struct LobCurve *curve, double average);

/**
 * Log-log fit over scales in `(lo, hi]`; pass infinities for the full
 * curve. With `normalized`, the range applies to `s / average`.
 *
 * # Safety
 * `curve` must be a live handle and `out` a valid pointer.
 */
enum LobStatus lob_curve_fit(const struct LobCurve *curve,
                             double lo,
                             double hi,
                             bool normalized,
                             struct LobFit *out);

/**
 * The three band exponents of a normalized curve. `status[k]` reports
 * band `k` separately; the return value only covers argument errors.
 *
 * # Safety
 * `curve` must be a live handle; `fits` and `status` must hold 3 entries.
 */
enum LobStatus lob_curve_local_alphas(const struct LobCurve *curve,
                                      struct LobFit *fits,
                                      enum LobStatus *status);

/**
 * # Safety
 * `curve` must be null or a handle not yet freed.
 */
void lob_curve_free(struct LobCurve *curve);

/**
 * Fill `out` with `n` samples of a seeded test signal; `kind` is a
 * `LobSignal` value.
 *
 * # Safety
 * `out` must hold `n` values.
 */
enum LobStatus lob_generate(uint32_t kind, double hurst, size_t n, uint64_t seed, double *out);

/**
 * Sub-sampled realized variance of a mid-price path. `times` must be
 * non-decreasing; a NaN mid marks a one-sided book.
 *
 * # Safety
 * `times` and `mids` must hold `n` values; `out` must be valid.
 */
enum LobStatus lob_realized_variance(const uint32_t *times,
                                     const double *mids,
                                     size_t n,
                                     uint32_t start,
                                     uint32_t end,
                                     uint32_t grid_seconds,
                                     uint32_t n_offsets,
                                     double *out);

/**
 * Pearson correlation with the two-sided 1% test; NaN pairs are dropped.
 *
 * # Safety
 * `x` and `y` must hold `n` values; `out` must be valid.
 */
enum LobStatus lob_correlate(const double *x,
                             const double *y,
                             size_t n,
                             struct LobCorrelation *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOBSCALE_H */
