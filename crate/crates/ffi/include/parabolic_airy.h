#ifndef PARABOLIC_AIRY_H
#define PARABOLIC_AIRY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Pipeline selector for [`af_joint_cdf`].
 */
typedef enum AfMethod {
  AF_METHOD_EXT_AIRY = 0,
  AF_METHOD_CONTOUR_K = 1,
  AF_METHOD_B_MINUS_A = 2,
  AF_METHOD_LIU_SUM = 3,
} AfMethod;

/**
 * Status codes returned by every function.
 */
typedef enum AfStatus {
  AF_STATUS_OK = 0,
  AF_STATUS_NULL_POINTER = 1,
  AF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Points not strictly increasing in time, mismatched lengths, non-finite input.
   */
  AF_STATUS_INVALID_CONFIG = 3,
  /**
   * Refinement difference above the configured tolerance.
   */
  AF_STATUS_NOT_CONVERGED = 4,
  /**
   * Non-finite values or a singular matrix.
   */
  AF_STATUS_NUMERIC = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  AF_STATUS_INTERNAL = 6,
} AfStatus;

/**
 * Opaque quadrature settings.
 */
typedef struct AfConfig AfConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * A new handle with default settings. Free it with [`af_config_free`].
 */
struct AfConfig *af_config_new(void);

/**
 * Releases a handle from [`af_config_new`]. Null is ignored.
 *
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void af_config_free(struct AfConfig *cfg);

/**
 * Gauss–Legendre nodes per contour panel.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum AfStatus af_config_set_nodes(struct AfConfig *cfg, uintptr_t nodes);

/**
 * Minimal arc-length truncation of contour rays.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum AfStatus af_config_set_truncation(struct AfConfig *cfg, double truncation);

/**
 * Right end of the half-line in the real-side determinants.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum AfStatus af_config_set_lambda_max(struct AfConfig *cfg, double lambda_max);

/**
 * Radius of the circle carrying the auxiliary `z` integrals, in `(0, 1)`.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum AfStatus af_config_set_z_radius(struct AfConfig *cfg, double z_radius);

/**
 * Refinement tolerance.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
enum AfStatus af_config_set_tol(struct AfConfig *cfg, double tol);

/**
 * `P(A(alpha[i]) <= beta[i] for all i)` for `m` points.
 *
 * `cfg` may be null for default settings. `out_error` may be null.
 *
 * # Safety
 * `alpha` and `beta` must point to `m` doubles; `cfg` must be null or live;
 * `out_value` must be writable.
 */
enum AfStatus af_joint_cdf(const struct AfConfig *cfg,
                           const double *alpha,
                           const double *beta,
                           uintptr_t m,
                           enum AfMethod method,
                           double *out_value,
                           double *out_error);

/**
 * The Airy function `Ai(x)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AfStatus af_airy_ai(double x, double *out);

/**
 * The GUE Tracy–Widom distribution function.
 *
 * # Safety
 * `out` must be writable.
 */
enum AfStatus af_f_gue(double s, double *out);

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *af_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *af_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARABOLIC_AIRY_H */
