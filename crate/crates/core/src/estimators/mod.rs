//! One-pass, constant-memory estimators sharing the [`QuantileTracker`]
//! interface.
//!
//! * [`Qewa`] tracks a quantile as an exponentially weighted average whose
//!   combination weight changes with every sample.
//! * [`Dumiqe`] is the multiplicative sign-driven estimator.
//! * [`FrugalAdditive`] is its additive counterpart with a fixed step.
//! * [`EwaMean`] is the plain exponentially weighted mean.

mod dumiqe;
mod ewa;
mod frugal;
mod qewa;

pub use dumiqe::{Dumiqe, DUMIQE_ZERO_ESCAPE};
pub use ewa::EwaMean;
pub use frugal::FrugalAdditive;
pub use qewa::{empirical_quantile, Qewa, StepWeights, DEFAULT_GAMMA_RATIO, DEFAULT_WARMUP};

use crate::error::Result;

/// Common streaming interface over all estimators.
pub trait QuantileTracker {
    /// Consume one observation. Non-finite values are rejected and leave the
    /// state untouched.
    fn observe(&mut self, x: f64) -> Result<()>;

    /// Current estimate, or [`crate::Error::NotReady`] while warming up.
    fn estimate(&self) -> Result<f64>;

    /// Best available value even while warming up, `None` before any sample.
    fn provisional(&self) -> Option<f64> {
        self.estimate().ok()
    }

    /// Number of observations consumed so far.
    fn n_seen(&self) -> u64;
}

impl<T: QuantileTracker + ?Sized> QuantileTracker for Box<T> {
    fn observe(&mut self, x: f64) -> Result<()> {
        (**self).observe(x)
    }

    fn estimate(&self) -> Result<f64> {
        (**self).estimate()
    }

    fn provisional(&self) -> Option<f64> {
        (**self).provisional()
    }

    fn n_seen(&self) -> u64 {
        (**self).n_seen()
    }
}
