/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef ADRT_H
#define ADRT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AdrtDtype {
  ADRT_DTYPE_I64 = 0,
  ADRT_DTYPE_F64 = 1,
} AdrtDtype;

typedef enum AdrtKind {
  ADRT_KIND_IMAGE = 0,
  ADRT_KIND_SINO = 1,
} AdrtKind;

/**
 * Result of every fallible call.
 */
typedef enum AdrtStatus {
  ADRT_STATUS_OK = 0,
  ADRT_STATUS_ARGUMENT = 1,
  ADRT_STATUS_OVERFLOW = 2,
  ADRT_STATUS_CLIP = 3,
  ADRT_STATUS_OUT_OF_RANGE = 4,
  ADRT_STATUS_FORMAT = 5,
  ADRT_STATUS_IO = 6,
  ADRT_STATUS_NULL_POINTER = 7,
  ADRT_STATUS_DTYPE = 8,
  ADRT_STATUS_INCONSISTENT = 9,
  ADRT_STATUS_PANIC = 10,
} AdrtStatus;

/**
 * Opaque image handle.
 */
typedef struct AdrtImage AdrtImage;

/**
 * Shape of an image handle.
 */
typedef struct AdrtInfo {
  uint32_t n;
  size_t width;
  int64_t lo;
  int64_t hi;
  enum AdrtDtype dtype;
  enum AdrtKind kind;
} AdrtInfo;

/**
 * Summary of a range validation.
 */
typedef struct AdrtValidation {
  bool passed;
  size_t total;
  size_t mass_count;
  size_t support_count;
  size_t violations;
  size_t outside_support;
  double max_abs;
} AdrtValidation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *adrt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *adrt_version(void);

/**
 * Zero image of scale `n` on the height window `[lo, hi)`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum AdrtStatus adrt_image_new(uint32_t n,
                               int64_t lo,
                               int64_t hi,
                               enum AdrtDtype dtype,
                               enum AdrtKind kind,
                               struct AdrtImage **out);

/**
 * Square integer image from `4^n` row-major values.
 *
 * # Safety
 * `data` must point to `4^n` readable values; `out` must be writable.
 */
enum AdrtStatus adrt_image_from_square_i64(uint32_t n, const int64_t *data, struct AdrtImage **out);

/**
 * Square float image from `4^n` row-major values.
 *
 * # Safety
 * `data` must point to `4^n` readable values; `out` must be writable.
 */
enum AdrtStatus adrt_image_from_square_f64(uint32_t n, const double *data, struct AdrtImage **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `img` must come from this library and not be used afterwards.
 */
void adrt_image_free(struct AdrtImage *img);

/**
 * Deep copy.
 *
 * # Safety
 * `img` must be a live handle; `out` must be writable.
 */
enum AdrtStatus adrt_image_clone(const struct AdrtImage *img, struct AdrtImage **out);

/**
 * # Safety
 * `img` must be a live handle; `info` must be writable.
 */
enum AdrtStatus adrt_image_info(const struct AdrtImage *img, struct AdrtInfo *info);

/**
 * Value at `(h, j)`; zero outside the window.
 *
 * # Safety
 * `img` must be a live handle; `value` must be writable.
 */
enum AdrtStatus adrt_image_get_i64(const struct AdrtImage *img,
                                   int64_t h,
                                   size_t j,
                                   int64_t *value);

/**
 * # Safety
 * `img` must be a live handle; `value` must be writable.
 */
enum AdrtStatus adrt_image_get_f64(const struct AdrtImage *img, int64_t h, size_t j, double *value);

/**
 * # Safety
 * `img` must be a live handle.
 */
enum AdrtStatus adrt_image_set_i64(struct AdrtImage *img, int64_t h, size_t j, int64_t value);

/**
 * # Safety
 * `img` must be a live handle.
 */
enum AdrtStatus adrt_image_set_f64(struct AdrtImage *img, int64_t h, size_t j, double value);

/**
 * Copies the window row-major into `buf`, which holds `len` values.
 *
 * # Safety
 * `img` must be a live handle; `buf` must be writable for `len` values.
 */
enum AdrtStatus adrt_image_copy_i64(const struct AdrtImage *img, int64_t *buf, size_t len);

/**
 * # Safety
 * `img` must be a live handle; `buf` must be writable for `len` values.
 */
enum AdrtStatus adrt_image_copy_f64(const struct AdrtImage *img, double *buf, size_t len);

/**
 * Single-quadrant transform of a square image; the result has the window
 * `[-(N - 1), N)`.
 *
 * # Safety
 * `img` must be a live handle; `out` must be writable.
 */
enum AdrtStatus adrt_forward(const struct AdrtImage *img, struct AdrtImage **out);

/**
 * Exact inverse. Without `allow_out_of_range`, sinograms outside the range
 * fail with `ADRT_STATUS_OUT_OF_RANGE`; with it, offending values are
 * dropped. `tol` is the relative zero threshold for float data.
 *
 * # Safety
 * `img` must be a live handle; `out` must be writable.
 */
enum AdrtStatus adrt_inverse(const struct AdrtImage *img,
                             bool allow_out_of_range,
                             double tol,
                             struct AdrtImage **out);

/**
 * Back-projection through levels `m..1`; the window grows upward by
 * `2^m - 1`.
 *
 * # Safety
 * `img` must be a live handle; `out` must be writable.
 */
enum AdrtStatus adrt_backproject(const struct AdrtImage *img, uint32_t m, struct AdrtImage **out);

/**
 * Range validation. `tol` only applies to float data.
 *
 * # Safety
 * `img` must be a live handle; `report` must be writable.
 */
enum AdrtStatus adrt_validate(const struct AdrtImage *img,
                              double tol,
                              struct AdrtValidation *report);

/**
 * Number of range constraints at scale `n`, `N (N - 1) / 2`.
 */
uint64_t adrt_constraint_count(uint32_t n);

/**
 * Reads a text or binary `ADRT1` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum AdrtStatus adrt_read_file(const char *path, struct AdrtImage **out);

/**
 * Writes an `ADRT1` file, text unless `binary` is set.
 *
 * # Safety
 * `img` must be a live handle; `path` must be a NUL-terminated string.
 */
enum AdrtStatus adrt_write_file(const struct AdrtImage *img, const char *path, bool binary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADRT_H */
