#ifndef KFD_H
#define KFD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call. Values 2 to 5 match the exit codes of
 * the `kfd` binary.
 */
typedef enum KfdStatus {
  KFD_STATUS_OK = 0,
  KFD_STATUS_NULL_POINTER = 1,
  KFD_STATUS_INVALID = 2,
  KFD_STATUS_IO = 3,
  KFD_STATUS_DEGENERATE = 4,
  KFD_STATUS_DIVERGENCE = 5,
  KFD_STATUS_BUFFER_TOO_SMALL = 6,
  KFD_STATUS_PANIC = 7,
} KfdStatus;

/**
 * Feature matrix of one video.
 */
typedef struct KfdFeatures KfdFeatures;

/**
 * Trained regression head.
 */
typedef struct KfdModel KfdModel;

/**
 * Smoothing spline fitted to a score series.
 */
typedef struct KfdSpline KfdSpline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *kfd_last_error(void);

/**
 * Read a KFDF feature file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KfdStatus kfd_features_read(const char *path, struct KfdFeatures **out);

/**
 * Build a feature matrix from `frames * dim` row-major values.
 *
 * # Safety
 * `data` must point to `frames * dim` floats and `out` must be valid.
 */
enum KfdStatus kfd_features_new(const float *data,
                                size_t frames,
                                size_t dim,
                                struct KfdFeatures **out);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
size_t kfd_features_frames(const struct KfdFeatures *f);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
size_t kfd_features_dim(const struct KfdFeatures *f);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void kfd_features_free(struct KfdFeatures *f);

/**
 * Load a model saved by `kfd train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KfdStatus kfd_model_load(const char *path, struct KfdModel **out);

/**
 * Parse a model from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KfdStatus kfd_model_from_json(const char *json, struct KfdModel **out);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t kfd_model_input_dim(const struct KfdModel *m);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void kfd_model_free(struct KfdModel *m);

/**
 * Per-frame model output. `out` needs room for one value per frame.
 *
 * # Safety
 * Handles must be live and `out` must hold `out_len` doubles.
 */
enum KfdStatus kfd_model_predict(const struct KfdModel *m,
                                 const struct KfdFeatures *f,
                                 double *out,
                                 size_t out_len);

/**
 * Default smoothing weight for a clip of `frames` frames.
 */
double kfd_select_alpha(size_t frames);

/**
 * Fit a natural cubic smoothing spline with weight `p` in (0, 1].
 *
 * # Safety
 * `y` must hold `len` doubles and `out` must be valid.
 */
enum KfdStatus kfd_spline_fit(const double *y, size_t len, double p, struct KfdSpline **out);

/**
 * # Safety
 * `s` must be null or a live handle.
 */
size_t kfd_spline_len(const struct KfdSpline *s);

/**
 * Copy the fitted values at the knots.
 *
 * # Safety
 * `s` must be live and `out` must hold `out_len` doubles.
 */
enum KfdStatus kfd_spline_fitted(const struct KfdSpline *s, double *out, size_t out_len);

/**
 * Spline value at `t` in `[0, len - 1]`.
 *
 * # Safety
 * `s` must be live and `value` valid.
 */
enum KfdStatus kfd_spline_eval(const struct KfdSpline *s, double t, double *value);

/**
 * # Safety
 * `s` must be null or a handle not yet freed.
 */
void kfd_spline_free(struct KfdSpline *s);

/**
 * Interior extrema of a series. `count` always receives the number found;
 * if it exceeds `capacity` the call returns `BufferTooSmall` and writes
 * nothing else.
 *
 * # Safety
 * `series` must hold `len` doubles; `indices` and `is_max` must hold
 * `capacity` entries; `count` must be valid.
 */
enum KfdStatus kfd_local_extrema(const double *series,
                                 size_t len,
                                 size_t *indices,
                                 uint8_t *is_max,
                                 size_t capacity,
                                 size_t *count);

/**
 * Smooth raw per-frame scores with the default frame-count rule and report
 * the keyframes. Output contract as [`kfd_local_extrema`].
 *
 * # Safety
 * As [`kfd_local_extrema`].
 */
enum KfdStatus kfd_detect_keyframes(const double *scores,
                                    size_t len,
                                    size_t *indices,
                                    uint8_t *is_max,
                                    size_t capacity,
                                    size_t *count);

/**
 * Signed count difference `predicted - ground_truth`.
 */
int64_t kfd_number_error(size_t predicted, size_t ground_truth);

/**
 * Mean absolute offset over order-matched keyframes; infinity when exactly
 * one list is empty.
 *
 * # Safety
 * Arrays must hold the given counts and `value` must be valid.
 */
enum KfdStatus kfd_location_error(const size_t *predicted,
                                  size_t n_predicted,
                                  const size_t *ground_truth,
                                  size_t n_ground_truth,
                                  double *value);

/**
 * Unit discriminant direction of `target` rows against `rest` rows, both
 * row-major with `dim` columns. Writes `dim` values to `w`.
 *
 * # Safety
 * `target` holds `n_target * dim` doubles, `rest` holds `n_rest * dim`,
 * `w` holds `dim`.
 */
enum KfdStatus kfd_lda_direction(const double *target,
                                 size_t n_target,
                                 const double *rest,
                                 size_t n_rest,
                                 size_t dim,
                                 double lambda,
                                 double *w);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KFD_H */
