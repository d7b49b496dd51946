#ifndef AMM_H
#define AMM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AmmStatus {
  AMM_STATUS_OK = 0,
  AMM_STATUS_NULL_POINTER = 1,
  AMM_STATUS_INVALID_UTF8 = 2,
  AMM_STATUS_NON_BINARY_ENTRY = 3,
  AMM_STATUS_EMPTY_MATRIX = 4,
  AMM_STATUS_RAGGED_ROWS = 5,
  AMM_STATUS_NON_FINITE_SCORE = 6,
  AMM_STATUS_TOO_FEW_ATTRIBUTES = 7,
  AMM_STATUS_DEGENERATE_SPLIT = 8,
  AMM_STATUS_LENGTH_MISMATCH = 9,
  AMM_STATUS_OUT_OF_RANGE = 10,
  AMM_STATUS_INVALID_PARAMETER = 11,
  AMM_STATUS_PARSE_ERROR = 12,
  AMM_STATUS_HEADER_MISMATCH = 13,
  AMM_STATUS_IO_FAILURE = 14,
  AMM_STATUS_PANIC = 15,
} AmmStatus;

/**
 * Values accepted by the `kind` argument of [`amm_distance`].
 */
typedef enum AmmDistanceKind {
  AMM_DISTANCE_KIND_LSQ = 0,
  AMM_DISTANCE_KIND_CVX = 1,
  AMM_DISTANCE_KIND_JP = 2,
} AmmDistanceKind;

/**
 * A ±1 attribute matrix.
 */
typedef struct AmmMatrix AmmMatrix;

/**
 * The result of [`amm_evaluate`].
 */
typedef struct AmmReport AmmReport;

/**
 * Metric settings. Obtain defaults from [`amm_metric_options_default`].
 */
typedef struct AmmMetricOptions {
  double split_ratio;
  uint64_t seed;
  size_t trials;
  double tol;
  size_t max_iter;
  bool full_distance;
  /**
   * Noise counts, or null for the default grid.
   */
  const size_t *grid;
  size_t grid_len;
} AmmMetricOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread, or null if the
 * last status-returning call succeeded. Valid until the next such call on
 * this thread.
 */
const char *amm_last_error(void);

/**
 * Static name of a status code, e.g. `"LengthMismatch"`.
 */
const char *amm_status_name(enum AmmStatus status);

/**
 * Builds a matrix from `n_images * n_attrs` entries stored column by
 * column.
 *
 * # Safety
 * `data` must point to `n_images * n_attrs` readable bytes and `out` must
 * be writable.
 */
enum AmmStatus amm_matrix_new(size_t n_images,
                              size_t n_attrs,
                              const int8_t *data,
                              struct AmmMatrix **out);

/**
 * Reads a matrix from a text file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum AmmStatus amm_matrix_read(const char *path, struct AmmMatrix **out);

/**
 * Writes a matrix to a text file, replacing it atomically.
 *
 * # Safety
 * `m` must be a live matrix handle and `path` a NUL-terminated string.
 */
enum AmmStatus amm_matrix_write(const struct AmmMatrix *m, const char *path);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void amm_matrix_free(struct AmmMatrix *m);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t amm_matrix_n_images(const struct AmmMatrix *m);

/**
 * Number of columns, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live matrix handle.
 */
size_t amm_matrix_n_attrs(const struct AmmMatrix *m);

/**
 * Copies the entries column by column into `buf`, which must hold exactly
 * `n_images * n_attrs` bytes.
 *
 * # Safety
 * `m` must be a live matrix handle and `buf` must point to `len` writable
 * bytes.
 */
enum AmmStatus amm_matrix_copy(const struct AmmMatrix *m, int8_t *buf, size_t len);

/**
 * Uniform random ±1 matrix with `n_attrs` columns.
 *
 * # Safety
 * `out` must be writable.
 */
enum AmmStatus amm_gen_noise(size_t n_images,
                             size_t n_attrs,
                             uint64_t seed,
                             struct AmmMatrix **out);

/**
 * Distance of `d` from `s`; `kind` is an [`AmmDistanceKind`] value.
 *
 * # Safety
 * `s` and `d` must be live matrix handles and `out` must be writable.
 */
enum AmmStatus amm_distance(const struct AmmMatrix *s,
                            const struct AmmMatrix *d,
                            int kind,
                            double tol,
                            size_t max_iter,
                            double *out);

struct AmmMetricOptions amm_metric_options_default(void);

/**
 * Scores `d` against `s`. A null `opts` selects the defaults.
 *
 * # Safety
 * `s` and `d` must be live matrix handles, `opts` null or valid (with
 * `grid` pointing to `grid_len` values when non-null), and `out` writable.
 */
enum AmmStatus amm_evaluate(const struct AmmMatrix *s,
                            const struct AmmMatrix *d,
                            const struct AmmMetricOptions *opts,
                            struct AmmReport **out);

/**
 * Writes the three scores; any output pointer may be null.
 *
 * # Safety
 * `r` must be a live report handle; non-null outputs must be writable.
 */
enum AmmStatus amm_report_gammas(const struct AmmReport *r,
                                 double *gamma_cvx,
                                 double *gamma_jp,
                                 double *gamma_tilde);

/**
 * Writes the saturation and degradation flags; any output pointer may be
 * null.
 *
 * # Safety
 * `r` must be a live report handle; non-null outputs must be writable.
 */
enum AmmStatus amm_report_flags(const struct AmmReport *r,
                                bool *saturated_cvx,
                                bool *saturated_jp,
                                bool *degraded);

/**
 * The full report as JSON. Release the string with [`amm_string_free`].
 *
 * # Safety
 * `r` must be a live report handle and `out` writable.
 */
enum AmmStatus amm_report_json(const struct AmmReport *r, char **out);

/**
 * # Safety
 * `r` must be null or a handle not yet freed.
 */
void amm_report_free(struct AmmReport *r);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void amm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMM_H */
