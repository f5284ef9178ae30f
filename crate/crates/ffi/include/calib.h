#ifndef CALIB_H
#define CALIB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum CalibStatus {
  CALIB_STATUS_OK = 0,
  CALIB_STATUS_NULL_POINTER = 1,
  CALIB_STATUS_INVALID_INPUT = 2,
  CALIB_STATUS_UNKNOWN_MEASURE = 3,
  CALIB_STATUS_ORACLE_CAP_EXCEEDED = 4,
  CALIB_STATUS_INTERNAL = 5,
  CALIB_STATUS_PANIC = 6,
} CalibStatus;

/**
 * Finite feature space with masses, predictions and conditional label means.
 */
typedef struct CalibInstance CalibInstance;

/**
 * Distribution over (prediction, label) pairs.
 */
typedef struct CalibJoint CalibJoint;

/**
 * Actions with payoffs for outcomes 0 and 1.
 */
typedef struct CalibTask CalibTask;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a joint from `n` predictions in `[0,1]`, labels in `{0,1}` and
 * optional nonnegative weights (`NULL` for uniform).
 *
 * # Safety
 * `predictions` and `labels` must point to `n` doubles, `weights` to `n`
 * doubles or be null, and `out` to writable storage for one pointer.
 */
enum CalibStatus calib_joint_new(const double *predictions,
                                 const double *labels,
                                 const double *weights,
                                 size_t n,
                                 struct CalibJoint **out);

/**
 * # Safety
 * `joint` must come from `calib_joint_new` or `calib_instance_project` and
 * not be used afterwards. Null is ignored.
 */
void calib_joint_free(struct CalibJoint *joint);

/**
 * Number of distinct predictions.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_joint_levels(const struct CalibJoint *joint, size_t *out);

/**
 * Expected calibration error.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_ece(const struct CalibJoint *joint, double *out);

/**
 * `q`-th moment calibration error, `q >= 1`.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_ece_q(const struct CalibJoint *joint, double q, double *out);

/**
 * Bucketed ECE with `buckets` equal-width buckets.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_binned_ece(const struct CalibJoint *joint, size_t buckets, double *out);

/**
 * Smooth calibration error.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_smce(const struct CalibJoint *joint, double *out);

/**
 * Earthmover distance between the joint and its self-consistent twin.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_emd(const struct CalibJoint *joint, double *out);

/**
 * Calibration decision loss.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_cdl(const struct CalibJoint *joint, double *out);

/**
 * Largest bias against a monomial of degree at most `degree`.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_low_degree_ce(const struct CalibJoint *joint, size_t degree, double *out);

/**
 * Kernel calibration error with `exp(-|u - v| / scale)`.
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_kernel_ce_laplace(const struct CalibJoint *joint, double scale, double *out);

/**
 * Upper distance to calibration (at most 12 distinct predictions).
 *
 * # Safety
 * `joint` must be a live handle and `out` writable.
 */
enum CalibStatus calib_dce_upper(const struct CalibJoint *joint, double *out);

/**
 * Any measure by its command-line id, e.g. `"binned:10"` or `"cfdl:matching"`.
 *
 * # Safety
 * `joint` must be a live handle, `id` a NUL-terminated string and `out` writable.
 */
enum CalibStatus calib_measure(const struct CalibJoint *joint, const char *id, double *out);

/**
 * Builds an instance of `n` points; masses are renormalized when they sum to
 * 1 within 1e-9.
 *
 * # Safety
 * The three arrays must hold `n` doubles each and `out` must be writable.
 */
enum CalibStatus calib_instance_new(const double *masses,
                                    const double *predictions,
                                    const double *cond_means,
                                    size_t n,
                                    struct CalibInstance **out);

/**
 * # Safety
 * `instance` must come from `calib_instance_new` and not be used afterwards.
 */
void calib_instance_free(struct CalibInstance *instance);

/**
 * The (prediction, label) joint of an instance as a new handle.
 *
 * # Safety
 * `instance` must be a live handle and `out` writable.
 */
enum CalibStatus calib_instance_project(const struct CalibInstance *instance,
                                        struct CalibJoint **out);

/**
 * True distance to calibration (at most 12 points).
 *
 * # Safety
 * `instance` must be a live handle and `out` writable.
 */
enum CalibStatus calib_dce(const struct CalibInstance *instance, double *out);

/**
 * Builds a task from `actions` rows `u(a, 0), u(a, 1)` stored row-major.
 *
 * # Safety
 * `payoffs` must hold `2 * actions` doubles and `out` must be writable.
 */
enum CalibStatus calib_task_new(const double *payoffs, size_t actions, struct CalibTask **out);

/**
 * # Safety
 * `task` must come from `calib_task_new` and not be used afterwards.
 */
void calib_task_free(struct CalibTask *task);

/**
 * Payoff lost on `task` by trusting the predictions instead of recalibrating.
 *
 * # Safety
 * Both handles must be live and `out` writable.
 */
enum CalibStatus calib_cfdl(const struct CalibJoint *joint,
                            const struct CalibTask *task,
                            double *out);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the length needed to hold
 * the whole message including the terminator.
 *
 * # Safety
 * `buf` must point to `len` writable bytes or be null with `len == 0`.
 */
size_t calib_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *calib_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CALIB_H */
