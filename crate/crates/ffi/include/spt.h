#ifndef SPT_H
#define SPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SptStatus {
  SPT_STATUS_OK = 0,
  SPT_STATUS_INVALID_ARGUMENT = 1,
  SPT_STATUS_VALIDATION = 2,
  SPT_STATUS_NON_CONVERGENCE = 3,
  SPT_STATUS_UNSUPPORTED = 4,
  SPT_STATUS_DOMAIN = 5,
  SPT_STATUS_DIMENSION_CAP = 6,
  SPT_STATUS_IO = 7,
  SPT_STATUS_PANIC = 8,
} SptStatus;

/**
 * Opaque model handle.
 */
typedef struct SptModel SptModel;

/**
 * Result of a critical scan. `t_c` is NaN when no transition was found;
 * `order` is 0 (none), 1 (first) or 2 (second).
 */
typedef struct SptTransition {
  double t_c;
  int32_t order;
  double jump;
} SptTransition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a JSON model specification and validate it.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SptStatus spt_model_from_json(const char *json, struct SptModel **out);

/**
 * # Safety
 * `model` must come from [`spt_model_from_json`] and not be freed twice. Null is ignored.
 */
void spt_model_free(struct SptModel *model);

/**
 * Natural order-vector length of the model; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t spt_model_arity(const struct SptModel *model);

/**
 * # Safety
 * `u` must hold `len` doubles; `out` must be writable.
 */
enum SptStatus spt_phi(const struct SptModel *model, const double *u, size_t len, double *out);

/**
 * Gradient of the potential, written to `out[0..len]`.
 *
 * # Safety
 * `u` must hold `len` doubles and `out` must have room for `len` doubles.
 */
enum SptStatus spt_grad_phi(const struct SptModel *model, const double *u, size_t len, double *out);

/**
 * Global minimum: first minimizer into `out_u[0..out_len]` (truncated or zero-padded to `out_len`),
 * its potential value and `u²`.
 *
 * # Safety
 * `out_u` must have room for `out_len` doubles; `out_phi` and `out_u2` must be writable or null.
 */
enum SptStatus spt_minimize(const struct SptModel *model,
                            double *out_u,
                            size_t out_len,
                            double *out_phi,
                            double *out_u2);

/**
 * Thermal critical coupling of the Dicke/Rabi family; pass `INFINITY` for zero temperature.
 */
double spt_critical_line_dqr(double beta_delta);

/**
 * # Safety
 * `out_gamma_c` and `out_jump` must be writable.
 */
enum SptStatus spt_critical_line_twophoton(double gamma_prime,
                                           double *out_gamma_c,
                                           double *out_jump);

/**
 * First transition along the ray `t · direction` for `t ∈ [t_min, t_max]`.
 *
 * # Safety
 * `direction` must hold `len` doubles; `out` must be writable.
 */
enum SptStatus spt_critical_scan(const struct SptModel *model,
                                 const double *direction,
                                 size_t len,
                                 double t_min,
                                 double t_max,
                                 struct SptTransition *out);

/**
 * Ground-state photon number (summed over modes) of the finite model at macroscopicity `c`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SptStatus spt_ed_ground_photon_number(const struct SptModel *model,
                                           double c,
                                           size_t n_max,
                                           double *out);

/**
 * Copy the calling thread's last error message (NUL-terminated, truncated to `len`) into `buf`.
 * Returns the full message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must have room for `len` bytes, or be null with `len == 0`.
 */
size_t spt_last_error(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPT_H */
