#ifndef TERASCOPE_H
#define TERASCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Argument outside the mathematical domain of the operation.
   */
  TS_STATUS_DOMAIN = 3,
  /**
   * No association radius exists for the parameters.
   */
  TS_STATUS_INFEASIBLE_GEOMETRY = 4,
  TS_STATUS_UNKNOWN_KEY = 5,
  /**
   * A panic was caught at the boundary.
   */
  TS_STATUS_INTERNAL = 6,
} TsStatus;

typedef enum TsMode {
  TS_MODE_FULL = 0,
  TS_MODE_INTERFERENCE_ONLY = 1,
  TS_MODE_BLOCKAGE_ONLY = 2,
  TS_MODE_DOMINANT_ONLY = 3,
} TsMode;

typedef enum TsCoupling {
  TS_COUPLING_INDEPENDENT = 0,
  TS_COUPLING_SHARED = 1,
} TsCoupling;

/**
 * Opaque parameter set, in configuration units (dB for powers and gains).
 */
typedef struct TsParams TsParams;

/**
 * Closed-form coverage at one link distance.
 */
typedef struct TsCoverage {
  double p_c;
  double p_cl;
  double p_l;
  /**
   * Mean number of dominant interferers; infinite when SNR-infeasible.
   */
  double lambda;
  /**
   * NaN when no dominant region exists.
   */
  double dominant_radius;
  bool snr_infeasible;
  bool outside_association;
} TsCoverage;

typedef struct TsEstimate {
  double value;
  double half_width_95;
  uint64_t n_trials;
  uint64_t seed;
} TsEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * New parameter set holding the reference values. Free with
 * [`ts_params_free`].
 */
struct TsParams *ts_params_new_default(void);

/**
 * Releases a parameter set. Null is ignored.
 *
 * # Safety
 * `params` must come from [`ts_params_new_default`] and not be used again.
 */
void ts_params_free(struct TsParams *params);

/**
 * Sets a parameter by its config name (`h_A`, `tau_dB`, `lambda_B`, …).
 * Consistency is checked when the parameters are used.
 *
 * # Safety
 * `params` must be a live handle and `key` a nul-terminated string.
 */
enum TsStatus ts_params_set(struct TsParams *params, const char *key, double value);

/**
 * Reads a parameter by its config name.
 *
 * # Safety
 * `params` must be a live handle, `key` nul-terminated, `out` writable.
 */
enum TsStatus ts_params_get(const struct TsParams *params, const char *key, double *out);

/**
 * Link-budget constant `P_T G_A G_U c²/(4πf)²` in W·m².
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum TsStatus ts_rho(const struct TsParams *params, double *out);

/**
 * Received LOS power (W) at horizontal distance `x` (m).
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum TsStatus ts_received_power(const struct TsParams *params, double x, double *out);

/**
 * Largest horizontal distance at which the SNR still meets the threshold.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum TsStatus ts_max_association_radius(const struct TsParams *params, double *out);

/**
 * Closed-form coverage at link distance `x0`.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum TsStatus ts_coverage(const struct TsParams *params, double x0, struct TsCoverage *out);

/**
 * Monte Carlo coverage estimate over `n_trials` trials from `seed`.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum TsStatus ts_estimate_coverage(const struct TsParams *params,
                                   double x0,
                                   uint64_t n_trials,
                                   enum TsMode mode,
                                   enum TsCoupling coupling,
                                   uint64_t seed,
                                   struct TsEstimate *out);

/**
 * Principal branch of the Lambert W function for `z ≥ 0`.
 *
 * # Safety
 * `out` must be writable.
 */
enum TsStatus ts_lambert_w0(double z, double *out);

/**
 * Why the most recent fallible call on this thread failed, or null if it
 * succeeded. Valid until the next such call from the same thread.
 */
const char *ts_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *ts_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TERASCOPE_H */
