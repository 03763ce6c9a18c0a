#ifndef NLSS_H
#define NLSS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define NLSS_MAX_MULTIRANK 4

typedef enum NlssStatus {
  NlssStatus_Ok = 0,
  NlssStatus_InvalidArgument = 1,
  NlssStatus_Parse = 2,
  NlssStatus_Io = 3,
  NlssStatus_CoverageGap = 4,
  NlssStatus_EmptyMask = 5,
  NlssStatus_ZeroBandMean = 6,
  NlssStatus_NullPointer = 7,
  NlssStatus_Panic = 8,
} NlssStatus;

typedef enum NlssFilter {
  NlssFilter_MSvd = 0,
  NlssFilter_HosvdHard = 1,
  NlssFilter_HosvdTruncate = 2,
} NlssFilter;

typedef enum NlssLayout {
  /**
   * H x W
   */
  NlssLayout_Gray = 0,
  /**
   * H x W x C
   */
  NlssLayout_Multiband = 1,
  /**
   * H x W x C x F
   */
  NlssLayout_Video = 2,
  /**
   * H x W x D
   */
  NlssLayout_Volume = 3,
} NlssLayout;

typedef enum NlssNoise {
  NlssNoise_Awgn = 0,
  NlssNoise_Rician = 1,
} NlssNoise;

/**
 * Opaque image handle.
 */
typedef struct NlssImage NlssImage;

/**
 * Pipeline settings. Fill with `nlss_filter_config_default` first.
 */
typedef struct NlssFilterConfig {
  size_t patch_size;
  size_t step;
  size_t search_radius;
  size_t temporal_radius;
  size_t k_similar;
  enum NlssFilter filter;
  double tau_factor;
  /**
   * Per-mode ranks for `NlssFilter_HosvdTruncate`; the first
   * `multirank_len` entries are used.
   */
  size_t multirank[NLSS_MAX_MULTIRANK];
  size_t multirank_len;
  double lambda_addback;
  size_t iterations;
  double sigma;
} NlssFilterConfig;

/**
 * `sam_degrees` and `ergas` are NaN unless `has_spectral` is nonzero.
 */
typedef struct NlssMetrics {
  double psnr;
  double ssim;
  double sam_degrees;
  double ergas;
  int32_t has_spectral;
} NlssMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *nlss_last_error_message(void);

/**
 * # Safety
 * `out` must point to writable memory for one `NlssFilterConfig`.
 */
enum NlssStatus nlss_filter_config_default(struct NlssFilterConfig *out);

/**
 * Creates an image with `ndims` extents from `dims`. `data` holds the
 * product of the extents in row-fastest order, or is NULL for zeros.
 *
 * # Safety
 * `dims` must point to `ndims` values, `data` (if non-null) to as many
 * doubles as the extents multiply to, and `out` to a writable handle slot.
 */
enum NlssStatus nlss_image_new(enum NlssLayout layout,
                               const size_t *dims,
                               size_t ndims,
                               const double *data,
                               double peak,
                               struct NlssImage **out);

/**
 * # Safety
 * `img` must be NULL or a handle from this library not yet freed.
 */
void nlss_image_free(struct NlssImage *img);

/**
 * Number of extents, or 0 for a NULL handle.
 *
 * # Safety
 * `img` must be NULL or a live handle.
 */
size_t nlss_image_ndims(const struct NlssImage *img);

/**
 * Number of samples, or 0 for a NULL handle.
 *
 * # Safety
 * `img` must be NULL or a live handle.
 */
size_t nlss_image_len(const struct NlssImage *img);

/**
 * Writes the extents and layout. `capacity` is the length of `dims`.
 *
 * # Safety
 * `img` must be a live handle, `dims` must hold `capacity` values and
 * `layout` must be NULL or writable.
 */
enum NlssStatus nlss_image_dims(const struct NlssImage *img,
                                size_t *dims,
                                size_t capacity,
                                enum NlssLayout *layout);

/**
 * Copies the samples into `out`, which must hold exactly `nlss_image_len`.
 *
 * # Safety
 * `img` must be a live handle and `out` must hold `len` doubles.
 */
enum NlssStatus nlss_image_copy_data(const struct NlssImage *img, double *out, size_t len);

/**
 * Loads a PNG or MDT1 file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable handle slot.
 */
enum NlssStatus nlss_image_load(const char *path, struct NlssImage **out);

/**
 * Saves as PNG when the path ends in `.png`, MDT1 otherwise.
 *
 * # Safety
 * `img` must be a live handle and `path` a NUL-terminated string.
 */
enum NlssStatus nlss_image_save(const struct NlssImage *img, const char *path);

/**
 * # Safety
 * `img` must be a live handle and `out` a writable handle slot.
 */
enum NlssStatus nlss_add_noise(const struct NlssImage *img,
                               enum NlssNoise kind,
                               double sigma,
                               uint64_t seed,
                               struct NlssImage **out);

/**
 * # Safety
 * `img` must be a live handle, `config` must point to an initialized
 * config and `out` must be a writable handle slot.
 */
enum NlssStatus nlss_denoise(const struct NlssImage *img,
                             const struct NlssFilterConfig *config,
                             struct NlssImage **out);

/**
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum NlssStatus nlss_psnr(const struct NlssImage *reference,
                          const struct NlssImage *test,
                          double peak,
                          double *out);

/**
 * PSNR over voxels where the reference exceeds 10/255 of `peak`.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum NlssStatus nlss_psnr_foreground(const struct NlssImage *reference,
                                     const struct NlssImage *test,
                                     double peak,
                                     double *out);

/**
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum NlssStatus nlss_ssim(const struct NlssImage *reference,
                          const struct NlssImage *test,
                          double peak,
                          double *out);

/**
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum NlssStatus nlss_evaluate(const struct NlssImage *reference,
                              const struct NlssImage *test,
                              double peak,
                              struct NlssMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLSS_H */
