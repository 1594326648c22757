#ifndef LOWPOLY_H
#define LOWPOLY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Numeric values match the `triangulate` CLI exit codes.
 */
typedef enum LpStatus {
  LP_STATUS_OK = 0,
  /**
   * Null pointer or malformed buffer passed across the boundary.
   */
  LP_STATUS_INVALID_ARGUMENT = 1,
  LP_STATUS_PARAMETER = 2,
  LP_STATUS_DEGENERATE = 3,
  LP_STATUS_IO = 4,
  LP_STATUS_INTERNAL = 5,
} LpStatus;

typedef struct LpImage LpImage;

typedef struct LpResult LpResult;

/**
 * `random_points == 0` means vertices come from edge pixels.
 */
typedef struct LpConfig {
  uint32_t threshold;
  uint32_t density;
  uint64_t seed;
  uint32_t random_points;
  bool include_frame;
} LpConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

struct LpConfig lp_config_default(void);

/**
 * Decodes a PNG or JPEG held in `data[0..len]`.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum LpStatus lp_image_decode(const uint8_t *data, size_t len, struct LpImage **out);

/**
 * Wraps tightly packed 8-bit RGB rows; `len` must equal `width * height * 3`.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum LpStatus lp_image_from_rgb(uint32_t width,
                                uint32_t height,
                                const uint8_t *data,
                                size_t len,
                                struct LpImage **out);

/**
 * # Safety
 * `img` must be null or a live handle from this library.
 */
uint32_t lp_image_width(const struct LpImage *img);

/**
 * # Safety
 * `img` must be null or a live handle from this library.
 */
uint32_t lp_image_height(const struct LpImage *img);

/**
 * # Safety
 * `img` must be null or a handle from this library that has not been freed.
 */
void lp_image_free(struct LpImage *img);

/**
 * Runs the whole pipeline. `config` may be null for defaults.
 *
 * # Safety
 * `img` must be a live image handle, `config` null or readable, `out` writable.
 */
enum LpStatus lp_run(const struct LpImage *img,
                     const struct LpConfig *config,
                     struct LpResult **out);

/**
 * # Safety
 * `res` must be null or a live result handle.
 */
size_t lp_result_vertex_count(const struct LpResult *res);

/**
 * # Safety
 * `res` must be null or a live result handle.
 */
size_t lp_result_triangle_count(const struct LpResult *res);

/**
 * # Safety
 * `res` must be null or a live result handle.
 */
size_t lp_result_edge_pixel_count(const struct LpResult *res);

/**
 * Copies the rendered image as packed RGB into `buf`, which must hold
 * `width * height * 3` bytes of the input image.
 *
 * # Safety
 * `res` must be a live result handle and `buf` must point to `len` writable bytes.
 */
enum LpStatus lp_result_copy_rgb(const struct LpResult *res, uint8_t *buf, size_t len);

/**
 * PNG encoding of the rendered image. The bytes stay valid until the
 * result is freed. Returns null on failure.
 *
 * # Safety
 * `res` must be a live result handle and `len` writable.
 */
const uint8_t *lp_result_png(const struct LpResult *res, size_t *len);

/**
 * Mesh as NUL-terminated JSON `{"vertices":[[x,y],..],"triangles":[[a,b,c],..]}`,
 * valid until the result is freed.
 *
 * # Safety
 * `res` must be null or a live result handle.
 */
const char *lp_result_mesh_json(const struct LpResult *res);

/**
 * # Safety
 * `res` must be null or a result handle that has not been freed.
 */
void lp_result_free(struct LpResult *res);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next library call on the same thread.
 */
const char *lp_last_error_message(void);

const char *lp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOWPOLY_H */
