use std::ffi::{c_char, CStr};
use std::ptr;

use calib::*;

fn joint(preds: &[f64], labels: &[f64], weights: Option<&[f64]>) -> *mut CalibJoint {
    let mut out = ptr::null_mut();
    let w = weights.map_or(ptr::null(), |w| w.as_ptr());
    let status = unsafe { calib_joint_new(preds.as_ptr(), labels.as_ptr(), w, preds.len(), &mut out) };
    assert_eq!(status, CalibStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let needed = unsafe { calib_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(needed >= 1);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn value(f: impl FnOnce(*mut f64) -> CalibStatus) -> f64 {
    let mut x = f64::NAN;
    assert_eq!(f(&mut x), CalibStatus::Ok, "{}", last_error());
    x
}

#[test]
fn two_point_measures() {
    let j = joint(&[0.4, 0.6], &[0.0, 1.0], None);
    unsafe {
        assert!((value(|o| calib_ece(j, o)) - 0.4).abs() < 1e-12);
        assert!((value(|o| calib_ece_q(j, 2.0, o)) - 0.4).abs() < 1e-12);
        assert!((value(|o| calib_smce(j, o)) - 0.04).abs() < 1e-12);
        assert!((value(|o| calib_emd(j, o)) - 0.08).abs() < 1e-9);
        assert!((value(|o| calib_cdl(j, o)) - 0.4).abs() < 1e-12);
        assert!((value(|o| calib_binned_ece(j, 2, o)) - 0.25).abs() < 1e-12);
        assert!(value(|o| calib_binned_ece(j, 3, o)).abs() < 1e-12);
        assert!((value(|o| calib_low_degree_ce(j, 1, o)) - 0.04).abs() < 1e-12);
        assert!(value(|o| calib_kernel_ce_laplace(j, 1.0, o)) > 0.0);
        assert!((value(|o| calib_dce_upper(j, o)) - 0.1).abs() < 1e-12);
        let mut levels = 0usize;
        assert_eq!(calib_joint_levels(j, &mut levels), CalibStatus::Ok);
        assert_eq!(levels, 2);
        calib_joint_free(j);
    }
}

#[test]
fn measures_by_id() {
    let j = joint(&[0.5, 0.5], &[1.0, 0.0], Some(&[0.55, 0.45]));
    unsafe {
        assert!((value(|o| calib_measure(j, c"cdl".as_ptr(), o)) - 0.1).abs() < 1e-9);
        assert!((value(|o| calib_measure(j, c"cfdl:matching".as_ptr(), o)) - 0.1).abs() < 1e-9);
        let mut x = 0.0;
        assert_eq!(calib_measure(j, c"nonsense".as_ptr(), &mut x), CalibStatus::UnknownMeasure);
        assert!(last_error().contains("nonsense"));
        calib_joint_free(j);
    }
}

#[test]
fn instances_and_tasks() {
    let eps: f64 = 0.1;
    let d = eps / (1.0 - 2.0 * eps);
    let masses = [0.5 - eps, eps, eps, 0.5 - eps];
    let preds = [0.5 - d, 0.5 - d, 0.5 + d, 0.5 + d];
    let cond = [0.5 - d, 1.0, 0.0, 0.5 + d];
    unsafe {
        let mut inst = ptr::null_mut();
        let s = calib_instance_new(masses.as_ptr(), preds.as_ptr(), cond.as_ptr(), 4, &mut inst);
        assert_eq!(s, CalibStatus::Ok);
        assert!((value(|o| calib_dce(inst, o)) - 2.0 * eps * d).abs() < 1e-12);
        let mut j = ptr::null_mut();
        assert_eq!(calib_instance_project(inst, &mut j), CalibStatus::Ok);
        assert!((value(|o| calib_ece(j, o)) - d).abs() < 1e-12);

        let payoffs = [1.0, 0.0, 0.0, 1.0];
        let mut task = ptr::null_mut();
        assert_eq!(calib_task_new(payoffs.as_ptr(), 2, &mut task), CalibStatus::Ok);
        // both values recalibrate to 1/2, where the lowest action wins
        assert!(value(|o| calib_cfdl(j, task, o)) >= 0.0);
        calib_task_free(task);
        calib_joint_free(j);
        calib_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        let s = calib_joint_new([1.5].as_ptr(), [1.0].as_ptr(), ptr::null(), 1, &mut out);
        assert_eq!(s, CalibStatus::InvalidInput);
        assert!(out.is_null());
        assert!(last_error().contains("1.5"));

        let s = calib_joint_new(ptr::null(), ptr::null(), ptr::null(), 0, &mut out);
        assert_eq!(s, CalibStatus::InvalidInput);

        let mut x = 0.0;
        assert_eq!(calib_ece(ptr::null(), &mut x), CalibStatus::InvalidInput);
        let j = joint(&[0.2], &[1.0], None);
        assert_eq!(calib_ece(j, ptr::null_mut()), CalibStatus::NullPointer);
        assert_eq!(calib_ece_q(j, 0.5, &mut x), CalibStatus::InvalidInput);
        assert_eq!(calib_kernel_ce_laplace(j, -1.0, &mut x), CalibStatus::InvalidInput);
        calib_joint_free(j);
        calib_joint_free(ptr::null_mut());

        let n = 13;
        let m = vec![1.0 / n as f64; n];
        let p: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let c = vec![0.5; n];
        let mut inst = ptr::null_mut();
        assert_eq!(calib_instance_new(m.as_ptr(), p.as_ptr(), c.as_ptr(), n, &mut inst), CalibStatus::Ok);
        assert_eq!(calib_dce(inst, &mut x), CalibStatus::OracleCapExceeded);
        calib_instance_free(inst);

        let mut task = ptr::null_mut();
        assert_eq!(calib_task_new([2.0, 0.0].as_ptr(), 1, &mut task), CalibStatus::InvalidInput);
    }
}

#[test]
fn error_buffer_truncates() {
    unsafe {
        let mut x = 0.0;
        calib_measure(ptr::null(), c"ece".as_ptr(), &mut x);
        let mut small = [0 as c_char; 4];
        let needed = calib_last_error_message(small.as_mut_ptr(), small.len());
        assert!(needed > small.len());
        assert_eq!(CStr::from_ptr(small.as_ptr()).to_bytes().len(), 3);
        assert_eq!(calib_last_error_message(ptr::null_mut(), 0), needed);
        let v = CStr::from_ptr(calib_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
