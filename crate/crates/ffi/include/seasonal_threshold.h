#ifndef SEASONAL_THRESHOLD_H
#define SEASONAL_THRESHOLD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum StClassification {
  ST_CLASSIFICATION_EXTINCTION = 0,
  ST_CLASSIFICATION_PERIODIC_POSITIVE = 1,
  ST_CLASSIFICATION_DIVERGENT = 2,
  ST_CLASSIFICATION_UNDECIDED = 3,
} StClassification;

typedef enum StRegime {
  ST_REGIME_INTERIOR_ROOT = 0,
  ST_REGIME_ALWAYS_EXTINCT = 1,
  ST_REGIME_ALWAYS_PERSISTENT = 2,
} StRegime;

typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_INPUT = 2,
  ST_STATUS_STRUCTURE = 3,
  ST_STATUS_CONVERGENCE = 4,
  ST_STATUS_CONDITIONING = 5,
  ST_STATUS_CERTIFICATE = 6,
  ST_STATUS_DIVERGENCE = 7,
  ST_STATUS_OTHER = 8,
  ST_STATUS_PANIC = 9,
} StStatus;

/**
 * Opaque handle to a two-season linearization.
 */
typedef struct StLinearization StLinearization;

typedef struct StThresholdReport {
  double theta_star;
  double rho_at_theta_star;
  enum StRegime regime;
  /**
   * 1 when rho passed the monotonicity certificate.
   */
  int32_t monotone_certificate;
  size_t iterations;
} StThresholdReport;

/**
 * Rates of one season: birth, maturation, juvenile death, juvenile crowding, adult death.
 */
typedef struct StInsectParams {
  double b;
  double h;
  double d_j;
  double c_j;
  double d_a;
} StInsectParams;

typedef struct StEquilibria {
  double r0;
  /**
   * 1 when the positive steady state exists (`R0 > 1`).
   */
  int32_t has_positive;
  double positive_j;
  double positive_a;
} StEquilibria;

typedef struct StOrbit {
  double fixed_point[2];
  double residual;
  size_t iterations;
  enum StClassification classification;
  double multiplier;
} StOrbit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *st_last_error_message(void);

/**
 * Builds the linearization from the unfavorable-season matrix `m1`, the
 * favorable-season matrix `m2` and the period. Free the handle with
 * [`st_linearization_free`].
 *
 * # Safety
 * `m1` and `m2` must point to `n * n` readable doubles; `out` must be writable.
 */
enum StStatus st_linearization_new(size_t n,
                                   const double *m1,
                                   const double *m2,
                                   double period,
                                   struct StLinearization **out);

/**
 * # Safety
 * `h` must come from [`st_linearization_new`] and not be freed twice. Null is ignored.
 */
void st_linearization_free(struct StLinearization *h);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum StStatus st_linearization_dim(const struct StLinearization *h, size_t *out);

/**
 * Spectral radius of the monodromy at `theta`.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum StStatus st_rho(const struct StLinearization *h, double theta, double *out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum StStatus st_rho_prime(const struct StLinearization *h, double theta, double *out);

/**
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum StStatus st_rho_second(const struct StLinearization *h, double theta, double *out);

/**
 * Perron root with right vector `v` (unit norm) and left vector `v_star`
 * scaled so that `<v, v_star> = 1`.
 *
 * # Safety
 * `h` must be a live handle; `rho` must be writable and `v`, `v_star` must
 * each hold `n` doubles, where `n` is the handle's dimension.
 */
enum StStatus st_perron(const struct StLinearization *h,
                        double theta,
                        double *rho,
                        double *v,
                        double *v_star);

/**
 * Row-major monodromy matrix at `theta`.
 *
 * # Safety
 * `h` must be a live handle; `out` must hold `n * n` doubles.
 */
enum StStatus st_monodromy(const struct StLinearization *h, double theta, double *out);

/**
 * Threshold `theta*` where rho crosses one. A nonpositive `tol` selects the default.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum StStatus st_find_threshold(const struct StLinearization *h,
                                double tol,
                                struct StThresholdReport *out);

/**
 * # Safety
 * `params` must be readable; `out` must be writable.
 */
enum StStatus st_insect_r0(const struct StInsectParams *params, double *out);

/**
 * # Safety
 * `params` must be readable; `out` must be writable.
 */
enum StStatus st_insect_equilibria(const struct StInsectParams *params, struct StEquilibria *out);

/**
 * Periodic orbit of the two-season insect model started from `x0 = (J, A)`.
 *
 * # Safety
 * `unfavorable` and `favorable` must be readable, `x0` must hold two doubles
 * and `out` must be writable.
 */
enum StStatus st_insect_orbit(const struct StInsectParams *unfavorable,
                              const struct StInsectParams *favorable,
                              double theta,
                              double period,
                              const double *x0,
                              struct StOrbit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEASONAL_THRESHOLD_H */
