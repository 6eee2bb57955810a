use std::ffi::CStr;
use std::ptr;

use qewa::estimators::{Qewa, QuantileTracker};
use qewa_ffi::*;

#[test]
fn qewa_handle_matches_rust_estimator() {
    let xs: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64 / 10.0).collect();
    let mut reference = Qewa::new(0.7, 0.05, 0.0005, 10).unwrap();
    for &x in &xs {
        reference.observe(x).unwrap();
    }
    unsafe {
        let mut est = ptr::null_mut();
        assert_eq!(qt_qewa_new(0.7, 0.05, 0.0005, 10, &mut est), QtStatus::Ok);
        let mut value = f64::NAN;
        assert_eq!(qt_estimator_estimate(est, &mut value), QtStatus::NotReady);
        assert!(value.is_nan());
        assert_eq!(qt_estimator_observe_many(est, xs.as_ptr(), xs.len()), QtStatus::Ok);
        assert_eq!(qt_estimator_n_seen(est), 500);
        assert_eq!(qt_estimator_estimate(est, &mut value), QtStatus::Ok);
        assert_eq!(value.to_bits(), reference.estimate().unwrap().to_bits());
        qt_estimator_free(est);
    }
}

#[test]
fn constructors_validate_arguments() {
    unsafe {
        let mut est = ptr::null_mut();
        assert_eq!(qt_qewa_new(1.5, 0.05, 0.0005, 10, &mut est), QtStatus::InvalidArgument);
        assert!(est.is_null());
        assert_eq!(qt_dumiqe_new(0.5, 0.0, &mut est), QtStatus::InvalidArgument);
        assert_eq!(qt_frugal_new(0.5, -1.0, &mut est), QtStatus::InvalidArgument);
        assert_eq!(qt_ewa_mean_new(2.0, &mut est), QtStatus::InvalidArgument);
        assert_eq!(qt_ewa_mean_new(0.5, ptr::null_mut()), QtStatus::NullPointer);
    }
}

#[test]
fn baselines_and_bad_input() {
    unsafe {
        let mut est = ptr::null_mut();
        assert_eq!(qt_ewa_mean_new(0.5, &mut est), QtStatus::Ok);
        assert_eq!(qt_estimator_observe(est, 3.0), QtStatus::Ok);
        assert_eq!(qt_estimator_observe(est, 1.0), QtStatus::Ok);
        assert_eq!(qt_estimator_observe(est, f64::NAN), QtStatus::InvalidInput);
        let mut value = 0.0;
        assert_eq!(qt_estimator_estimate(est, &mut value), QtStatus::Ok);
        assert_eq!(value, 2.0);
        assert_eq!(qt_estimator_n_seen(est), 2);
        assert_eq!(qt_estimator_estimate(est, ptr::null_mut()), QtStatus::NullPointer);
        qt_estimator_free(est);

        let mut est = ptr::null_mut();
        assert_eq!(qt_dumiqe_new(0.7, 0.01, &mut est), QtStatus::Ok);
        let xs = [10.0, 12.0];
        assert_eq!(qt_estimator_observe_many(est, xs.as_ptr(), 2), QtStatus::Ok);
        assert_eq!(qt_estimator_estimate(est, &mut value), QtStatus::Ok);
        assert!((value - 10.07).abs() < 1e-12);
        assert_eq!(qt_estimator_observe_many(est, ptr::null(), 0), QtStatus::Ok);
        assert_eq!(qt_estimator_observe_many(est, ptr::null(), 1), QtStatus::NullPointer);
        qt_estimator_free(est);

        assert_eq!(qt_estimator_observe(ptr::null_mut(), 1.0), QtStatus::NullPointer);
        assert_eq!(qt_estimator_n_seen(ptr::null()), 0);
        qt_estimator_free(ptr::null_mut());
    }
}

#[test]
fn drift_detector_fires_after_a_jump() {
    unsafe {
        let mut config = std::mem::zeroed::<QtDriftConfig>();
        assert_eq!(qt_drift_config_default(&mut config), QtStatus::Ok);
        assert_eq!(config.q, 0.8);
        let mut det = ptr::null_mut();
        assert_eq!(qt_drift_new(&config, &mut det), QtStatus::Ok);
        let mut q = 0.0;
        assert_eq!(qt_drift_estimate(det, &mut q), QtStatus::NotReady);

        let mut first = None;
        for i in 0..1500u64 {
            let err = if i >= 400 { 5.0 } else { 0.5 } + 0.2 * (i as f64 * 0.7).sin();
            let mut fired = false;
            let mut event = QtDriftEvent::default();
            assert_eq!(qt_drift_observe(det, err, &mut fired, &mut event), QtStatus::Ok);
            if fired && first.is_none() {
                first = Some(event);
            }
        }
        let event = first.expect("no event");
        assert!(event.sample_index > 400 && event.sample_index < 600);
        assert!(event.quantile_estimate > event.threshold);
        let mut fired = false;
        assert_eq!(qt_drift_observe(det, f64::INFINITY, &mut fired, ptr::null_mut()), QtStatus::InvalidInput);
        assert_eq!(qt_drift_observe(det, 1.0, ptr::null_mut(), ptr::null_mut()), QtStatus::NullPointer);
        qt_drift_free(det);

        config.q = 1.5;
        let mut det = ptr::null_mut();
        assert_eq!(qt_drift_new(&config, &mut det), QtStatus::InvalidArgument);
        assert!(det.is_null());
        assert_eq!(qt_drift_new(ptr::null(), &mut det), QtStatus::NullPointer);
    }
}

#[test]
fn distribution_functions() {
    unsafe {
        let mut z = 0.0;
        assert_eq!(qt_normal_quantile(0.5, &mut z), QtStatus::Ok);
        assert!(z.abs() < 1e-12);
        assert_eq!(qt_normal_quantile(1.0, &mut z), QtStatus::InvalidInput);
        let mut p = 0.0;
        assert_eq!(qt_chi2_cdf(2.0, 2.0, &mut p), QtStatus::Ok);
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        let mut x = 0.0;
        assert_eq!(qt_chi2_quantile(p, 2.0, &mut x), QtStatus::Ok);
        assert!((x - 2.0).abs() < 1e-9);
        assert_eq!(qt_chi2_cdf(1.0, 2.0, ptr::null_mut()), QtStatus::NullPointer);
    }
}

#[test]
fn strings_are_static() {
    let version = unsafe { CStr::from_ptr(qt_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    for status in [QtStatus::Ok, QtStatus::NotReady, QtStatus::Panic] {
        let msg = unsafe { CStr::from_ptr(qt_status_message(status)) };
        assert!(!msg.to_bytes().is_empty());
    }
}
