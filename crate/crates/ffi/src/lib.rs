//! C ABI over the `qewa` estimators, drift detector and distribution
//! functions.
//!
//! Every handle is opaque and owned by the caller once created; release it
//! with the matching `*_free` function. Every fallible call returns a
//! [`QtStatus`] and writes its result through an out-pointer, which is left
//! untouched on error. Panics never cross the boundary.
//!
//! Handles are not synchronized: one handle must not be used from two
//! threads at the same time.

#![allow(clippy::missing_safety_doc)]

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use qewa::drift::{DriftConfig, DriftDetector};
use qewa::estimators::{Dumiqe, EwaMean, FrugalAdditive, Qewa, QuantileTracker};
use qewa::streams;
use qewa::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A tuning parameter is outside its domain.
    InvalidArgument = 2,
    /// An observation was rejected, e.g. NaN or infinite.
    InvalidInput = 3,
    /// The estimator is still in its warmup phase.
    NotReady = 4,
    /// A numerical routine failed.
    Numeric = 5,
    /// Internal error; the handle involved should be freed.
    Panic = 6,
}

impl From<&Error> for QtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => QtStatus::InvalidArgument,
            Error::NotReady { .. } => QtStatus::NotReady,
            Error::Numeric(_) => QtStatus::Numeric,
            _ => QtStatus::InvalidInput,
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), QtStatus>) -> QtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QtStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => QtStatus::Panic,
    }
}

fn check<T>(r: qewa::Result<T>) -> Result<T, QtStatus> {
    r.map_err(|e| QtStatus::from(&e))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), QtStatus> {
    if out.is_null() {
        return Err(QtStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

/// Static, NUL-terminated description of `status`.
#[no_mangle]
pub extern "C" fn qt_status_message(status: QtStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        QtStatus::Ok => b"ok\0",
        QtStatus::NullPointer => b"null pointer argument\0",
        QtStatus::InvalidArgument => b"parameter out of range\0",
        QtStatus::InvalidInput => b"observation rejected\0",
        QtStatus::NotReady => b"estimator still warming up\0",
        QtStatus::Numeric => b"numerical failure\0",
        QtStatus::Panic => b"internal error\0",
    };
    msg.as_ptr().cast()
}

/// Library version as a static, NUL-terminated string.
#[no_mangle]
pub extern "C" fn qt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque quantile (or mean) tracker.
pub struct QtEstimator {
    inner: Box<dyn QuantileTracker + Send>,
}

unsafe fn new_estimator<E>(
    make: impl FnOnce() -> qewa::Result<E>,
    out: *mut *mut QtEstimator,
) -> QtStatus
where
    E: QuantileTracker + Send + 'static,
{
    guard(|| {
        if out.is_null() {
            return Err(QtStatus::NullPointer);
        }
        let est = check(make())?;
        let handle = Box::new(QtEstimator {
            inner: Box::new(est),
        });
        write_out(out, Box::into_raw(handle))
    })
}

/// Create a QEWA tracker for quantile level `q`.
#[no_mangle]
pub unsafe extern "C" fn qt_qewa_new(
    q: f64,
    lambda: f64,
    gamma: f64,
    warmup: usize,
    out: *mut *mut QtEstimator,
) -> QtStatus {
    new_estimator(|| Qewa::new(q, lambda, gamma, warmup), out)
}

#[no_mangle]
pub unsafe extern "C" fn qt_dumiqe_new(
    q: f64,
    lambda: f64,
    out: *mut *mut QtEstimator,
) -> QtStatus {
    new_estimator(|| Dumiqe::new(q, lambda), out)
}

#[no_mangle]
pub unsafe extern "C" fn qt_frugal_new(q: f64, step: f64, out: *mut *mut QtEstimator) -> QtStatus {
    new_estimator(|| FrugalAdditive::new(q, step), out)
}

/// Exponentially weighted mean; `qt_estimator_estimate` returns the mean.
#[no_mangle]
pub unsafe extern "C" fn qt_ewa_mean_new(alpha: f64, out: *mut *mut QtEstimator) -> QtStatus {
    new_estimator(|| EwaMean::new(alpha), out)
}

unsafe fn estimator_mut<'a>(est: *mut QtEstimator) -> Result<&'a mut QtEstimator, QtStatus> {
    est.as_mut().ok_or(QtStatus::NullPointer)
}

#[no_mangle]
pub unsafe extern "C" fn qt_estimator_observe(est: *mut QtEstimator, x: f64) -> QtStatus {
    guard(|| check(estimator_mut(est)?.inner.observe(x)))
}

/// Feed `len` values. Stops at the first rejected value; the values before
/// it have been consumed.
#[no_mangle]
pub unsafe extern "C" fn qt_estimator_observe_many(
    est: *mut QtEstimator,
    xs: *const f64,
    len: usize,
) -> QtStatus {
    guard(|| {
        let est = estimator_mut(est)?;
        if len == 0 {
            return Ok(());
        }
        if xs.is_null() {
            return Err(QtStatus::NullPointer);
        }
        for &x in std::slice::from_raw_parts(xs, len) {
            check(est.inner.observe(x))?;
        }
        Ok(())
    })
}

/// Current estimate, or `QT_STATUS_NOT_READY` during warmup.
#[no_mangle]
pub unsafe extern "C" fn qt_estimator_estimate(est: *const QtEstimator, out: *mut f64) -> QtStatus {
    guard(|| {
        let est = est.as_ref().ok_or(QtStatus::NullPointer)?;
        let value = check(est.inner.estimate())?;
        write_out(out, value)
    })
}

/// Number of accepted observations; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn qt_estimator_n_seen(est: *const QtEstimator) -> u64 {
    est.as_ref().map_or(0, |e| e.inner.n_seen())
}

/// Release a handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qt_estimator_free(est: *mut QtEstimator) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QtDriftConfig {
    pub q: f64,
    pub threshold: f64,
    pub warmup_samples: u64,
    pub lambda: f64,
    pub gamma: f64,
    pub estimator_warmup: usize,
    pub reset_on_event: bool,
}

impl From<DriftConfig> for QtDriftConfig {
    fn from(c: DriftConfig) -> Self {
        QtDriftConfig {
            q: c.q,
            threshold: c.threshold,
            warmup_samples: c.warmup_samples,
            lambda: c.lambda,
            gamma: c.gamma,
            estimator_warmup: c.estimator_warmup,
            reset_on_event: c.reset_on_event,
        }
    }
}

impl From<QtDriftConfig> for DriftConfig {
    fn from(c: QtDriftConfig) -> Self {
        DriftConfig {
            q: c.q,
            threshold: c.threshold,
            warmup_samples: c.warmup_samples,
            lambda: c.lambda,
            gamma: c.gamma,
            estimator_warmup: c.estimator_warmup,
            reset_on_event: c.reset_on_event,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QtDriftEvent {
    /// 1-based index of the triggering sample.
    pub sample_index: u64,
    pub quantile_estimate: f64,
    pub threshold: f64,
}

/// Opaque drift detector.
pub struct QtDriftDetector {
    inner: DriftDetector,
}

/// Fill `out` with the default detector settings.
#[no_mangle]
pub unsafe extern "C" fn qt_drift_config_default(out: *mut QtDriftConfig) -> QtStatus {
    guard(|| write_out(out, DriftConfig::default().into()))
}

#[no_mangle]
pub unsafe extern "C" fn qt_drift_new(
    config: *const QtDriftConfig,
    out: *mut *mut QtDriftDetector,
) -> QtStatus {
    guard(|| {
        let config = config.as_ref().ok_or(QtStatus::NullPointer)?;
        if out.is_null() {
            return Err(QtStatus::NullPointer);
        }
        let inner = check(DriftDetector::new((*config).into()))?;
        write_out(out, Box::into_raw(Box::new(QtDriftDetector { inner })))
    })
}

/// Feed one prediction error. `fired` is set to whether an event fired; if
/// it did and `event` is not null, the event is written there.
#[no_mangle]
pub unsafe extern "C" fn qt_drift_observe(
    det: *mut QtDriftDetector,
    err: f64,
    fired: *mut bool,
    event: *mut QtDriftEvent,
) -> QtStatus {
    guard(|| {
        let det = det.as_mut().ok_or(QtStatus::NullPointer)?;
        if fired.is_null() {
            return Err(QtStatus::NullPointer);
        }
        let result = check(det.inner.observe(err))?;
        fired.write(result.is_some());
        if let (Some(e), false) = (result, event.is_null()) {
            event.write(QtDriftEvent {
                sample_index: e.sample_index,
                quantile_estimate: e.quantile_estimate,
                threshold: e.threshold,
            });
        }
        Ok(())
    })
}

/// Tracked error quantile, or `QT_STATUS_NOT_READY` during warmup.
#[no_mangle]
pub unsafe extern "C" fn qt_drift_estimate(det: *const QtDriftDetector, out: *mut f64) -> QtStatus {
    guard(|| {
        let det = det.as_ref().ok_or(QtStatus::NullPointer)?;
        let value = det.inner.estimate().ok_or(QtStatus::NotReady)?;
        write_out(out, value)
    })
}

#[no_mangle]
pub unsafe extern "C" fn qt_drift_free(det: *mut QtDriftDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

#[no_mangle]
pub unsafe extern "C" fn qt_normal_quantile(q: f64, out: *mut f64) -> QtStatus {
    guard(|| write_out(out, check(streams::normal_quantile(q))?))
}

#[no_mangle]
pub unsafe extern "C" fn qt_chi2_cdf(x: f64, nu: f64, out: *mut f64) -> QtStatus {
    guard(|| write_out(out, check(streams::chi2_cdf(x, nu))?))
}

#[no_mangle]
pub unsafe extern "C" fn qt_chi2_quantile(q: f64, nu: f64, out: *mut f64) -> QtStatus {
    guard(|| write_out(out, check(streams::chi2_quantile(q, nu))?))
}
