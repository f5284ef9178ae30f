//! C interface to `calibration-measures`.
//!
//! Joints, instances and decision tasks live behind opaque handles created by
//! `calib_*_new` and released by the matching `calib_*_free`. Every fallible
//! call returns a [`CalibStatus`] and writes its result through an out
//! pointer; on failure a message is kept per thread and can be fetched with
//! [`calib_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use calibration_measures::basic::{binned_ece, ece, ece_q};
use calibration_measures::decision::{cdl, cfdl, DecisionTask};
use calibration_measures::distance::{dce_oracle, dce_upper_oracle};
use calibration_measures::report::{evaluate, Config, Input, Measure};
use calibration_measures::weighted::{emd_joints, kernel_ce, low_degree_ce, smce, Kernel};
use calibration_measures::{EmpiricalJoint, Error, FiniteInstance, InstancePoint};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    UnknownMeasure = 3,
    OracleCapExceeded = 4,
    Internal = 5,
    Panic = 6,
}

/// Distribution over (prediction, label) pairs.
pub struct CalibJoint {
    inner: EmpiricalJoint,
}

/// Finite feature space with masses, predictions and conditional label means.
pub struct CalibInstance {
    inner: FiniteInstance,
}

/// Actions with payoffs for outcomes 0 and 1.
pub struct CalibTask {
    inner: DecisionTask,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(e: &Error) -> CalibStatus {
    match e.exit_code() {
        3 => CalibStatus::UnknownMeasure,
        4 => CalibStatus::OracleCapExceeded,
        1 => CalibStatus::Internal,
        _ => CalibStatus::InvalidInput,
    }
}

/// Runs `f`, storing its value in `out` and translating errors and panics.
fn guard<T>(out: *mut T, f: impl FnOnce() -> Result<T, Error>) -> CalibStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return CalibStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(value)) => {
            // SAFETY: checked non-null; the caller provides writable storage
            unsafe { out.write(value) };
            CalibStatus::Ok
        }
        Ok(Err(e)) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CalibStatus::Panic
        }
    }
}

/// Borrows a handle, or reports a null pointer.
unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Error> {
    // SAFETY: the caller passes a handle from the matching `_new` or null
    unsafe { p.as_ref() }.ok_or_else(|| Error::InvalidParameter("handle is null".into()))
}

unsafe fn slice<'a>(p: *const f64, n: usize) -> Result<&'a [f64], Error> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Error::InvalidParameter("array pointer is null".into()));
    }
    // SAFETY: the caller guarantees `n` readable doubles at `p`
    Ok(unsafe { std::slice::from_raw_parts(p, n) })
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Builds a joint from `n` predictions in `[0,1]`, labels in `{0,1}` and
/// optional nonnegative weights (`NULL` for uniform).
///
/// # Safety
/// `predictions` and `labels` must point to `n` doubles, `weights` to `n`
/// doubles or be null, and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn calib_joint_new(
    predictions: *const f64,
    labels: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut *mut CalibJoint,
) -> CalibStatus {
    guard(out, || {
        let (p, y) = unsafe { (slice(predictions, n)?, slice(labels, n)?) };
        let w = if weights.is_null() { None } else { Some(unsafe { slice(weights, n)? }) };
        let pairs: Vec<(f64, f64)> = p.iter().copied().zip(y.iter().copied()).collect();
        let inner = EmpiricalJoint::from_samples(&pairs, w)?;
        Ok(boxed(CalibJoint { inner }))
    })
}

/// # Safety
/// `joint` must come from `calib_joint_new` or `calib_instance_project` and
/// not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn calib_joint_free(joint: *mut CalibJoint) {
    if !joint.is_null() {
        // SAFETY: created by Box::into_raw in this crate
        drop(unsafe { Box::from_raw(joint) });
    }
}

/// Number of distinct predictions.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_joint_levels(joint: *const CalibJoint, out: *mut usize) -> CalibStatus {
    guard(out, || Ok(unsafe { handle(joint)? }.inner.level_sets().len()))
}

fn joint_value(
    joint: *const CalibJoint,
    out: *mut f64,
    f: impl FnOnce(&EmpiricalJoint) -> Result<f64, Error>,
) -> CalibStatus {
    guard(out, || f(&unsafe { handle(joint)? }.inner))
}

fn laplace(j: &EmpiricalJoint, scale: f64) -> Result<f64, Error> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("kernel scale {scale}")));
    }
    kernel_ce(j, &Kernel::Laplace { scale })
}

/// Expected calibration error.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_ece(joint: *const CalibJoint, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| Ok(ece(j)))
}

/// `q`-th moment calibration error, `q >= 1`.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_ece_q(joint: *const CalibJoint, q: f64, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| ece_q(j, q))
}

/// Bucketed ECE with `buckets` equal-width buckets.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_binned_ece(joint: *const CalibJoint, buckets: usize, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| binned_ece(j, buckets))
}

/// Smooth calibration error.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_smce(joint: *const CalibJoint, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| Ok(smce(j)))
}

/// Earthmover distance between the joint and its self-consistent twin.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_emd(joint: *const CalibJoint, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, emd_joints)
}

/// Calibration decision loss.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_cdl(joint: *const CalibJoint, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| Ok(cdl(j)))
}

/// Largest bias against a monomial of degree at most `degree`.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_low_degree_ce(joint: *const CalibJoint, degree: usize, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| Ok(low_degree_ce(j, degree)))
}

/// Kernel calibration error with `exp(-|u - v| / scale)`.
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_kernel_ce_laplace(joint: *const CalibJoint, scale: f64, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, |j| laplace(j, scale))
}

/// Upper distance to calibration (at most 12 distinct predictions).
///
/// # Safety
/// `joint` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_dce_upper(joint: *const CalibJoint, out: *mut f64) -> CalibStatus {
    joint_value(joint, out, dce_upper_oracle)
}

/// Any measure by its command-line id, e.g. `"binned:10"` or `"cfdl:matching"`.
///
/// # Safety
/// `joint` must be a live handle, `id` a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_measure(
    joint: *const CalibJoint,
    id: *const c_char,
    out: *mut f64,
) -> CalibStatus {
    guard(out, || {
        let j = unsafe { handle(joint)? };
        if id.is_null() {
            return Err(Error::InvalidParameter("measure id is null".into()));
        }
        // SAFETY: NUL-terminated per contract
        let id = unsafe { CStr::from_ptr(id) }
            .to_str()
            .map_err(|_| Error::UnknownMeasure("<non-UTF-8>".into()))?;
        let measure: Measure = id.parse()?;
        evaluate(&measure, &Input::from_joint(j.inner.clone()), &Config::default(), &mut Vec::new())
    })
}

/// Builds an instance of `n` points; masses are renormalized when they sum to
/// 1 within 1e-9.
///
/// # Safety
/// The three arrays must hold `n` doubles each and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calib_instance_new(
    masses: *const f64,
    predictions: *const f64,
    cond_means: *const f64,
    n: usize,
    out: *mut *mut CalibInstance,
) -> CalibStatus {
    guard(out, || {
        let (m, p, c) = unsafe { (slice(masses, n)?, slice(predictions, n)?, slice(cond_means, n)?) };
        let points = (0..n)
            .map(|i| InstancePoint {
                id: i.to_string(),
                mass: m[i],
                pred: p[i],
                cond_mean: c[i],
            })
            .collect();
        Ok(boxed(CalibInstance {
            inner: FiniteInstance::new(points)?,
        }))
    })
}

/// # Safety
/// `instance` must come from `calib_instance_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn calib_instance_free(instance: *mut CalibInstance) {
    if !instance.is_null() {
        // SAFETY: created by Box::into_raw in this crate
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// The (prediction, label) joint of an instance as a new handle.
///
/// # Safety
/// `instance` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_instance_project(
    instance: *const CalibInstance,
    out: *mut *mut CalibJoint,
) -> CalibStatus {
    guard(out, || {
        let inner = unsafe { handle(instance)? }.inner.project();
        Ok(boxed(CalibJoint { inner }))
    })
}

/// True distance to calibration (at most 12 points).
///
/// # Safety
/// `instance` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_dce(instance: *const CalibInstance, out: *mut f64) -> CalibStatus {
    guard(out, || dce_oracle(&unsafe { handle(instance)? }.inner))
}

/// Builds a task from `actions` rows `u(a, 0), u(a, 1)` stored row-major.
///
/// # Safety
/// `payoffs` must hold `2 * actions` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn calib_task_new(
    payoffs: *const f64,
    actions: usize,
    out: *mut *mut CalibTask,
) -> CalibStatus {
    guard(out, || {
        let u = unsafe { slice(payoffs, 2 * actions)? };
        let rows = u.chunks_exact(2).map(|r| [r[0], r[1]]).collect();
        Ok(boxed(CalibTask {
            inner: DecisionTask::from_payoffs(rows)?,
        }))
    })
}

/// # Safety
/// `task` must come from `calib_task_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn calib_task_free(task: *mut CalibTask) {
    if !task.is_null() {
        // SAFETY: created by Box::into_raw in this crate
        drop(unsafe { Box::from_raw(task) });
    }
}

/// Payoff lost on `task` by trusting the predictions instead of recalibrating.
///
/// # Safety
/// Both handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn calib_cfdl(
    joint: *const CalibJoint,
    task: *const CalibTask,
    out: *mut f64,
) -> CalibStatus {
    guard(out, || {
        let (j, t) = unsafe { (handle(joint)?, handle(task)?) };
        Ok(cfdl(&j.inner, &t.inner))
    })
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the length needed to hold
/// the whole message including the terminator.
///
/// # Safety
/// `buf` must point to `len` writable bytes or be null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn calib_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: `buf` holds `len > n` bytes per contract
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn calib_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
