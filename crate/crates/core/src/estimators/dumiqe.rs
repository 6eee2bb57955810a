use super::QuantileTracker;
use crate::error::{check_finite, check_unit_open, Error, Result};

/// Starting value substituted when the first observation is exactly zero.
pub const DUMIQE_ZERO_ESCAPE: f64 = 1e-6;

/// Deterministic multiplicative incremental quantile estimator.
///
/// The estimate grows by `lambda * q * q_hat` when the observation lies
/// above it and shrinks by `lambda * (1 - q) * q_hat` otherwise. The step is
/// proportional to the estimate itself, so the estimator scales with the
/// data but only uses the sign of `x - q_hat`.
///
/// **Degenerate behavior:** an estimate of exactly zero never moves, and a
/// negative estimate is pushed away from the quantile rather than toward it.
/// The first observation seeds the estimate; a first observation of `0.0`
/// is replaced by [`DUMIQE_ZERO_ESCAPE`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dumiqe {
    q: f64,
    lambda: f64,
    q_hat: Option<f64>,
    n_seen: u64,
}

impl Dumiqe {
    pub fn new(q: f64, lambda: f64) -> Result<Self> {
        check_unit_open("q", q)?;
        check_unit_open("lambda", lambda)?;
        Ok(Dumiqe {
            q,
            lambda,
            q_hat: None,
            n_seen: 0,
        })
    }

    /// Start from an explicit estimate instead of the first observation.
    /// Zero is accepted here and stays zero forever.
    pub fn with_estimate(q: f64, lambda: f64, q_hat: f64) -> Result<Self> {
        if !q_hat.is_finite() {
            return Err(Error::config("initial estimate must be finite"));
        }
        let mut est = Self::new(q, lambda)?;
        est.q_hat = Some(q_hat);
        Ok(est)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl QuantileTracker for Dumiqe {
    fn observe(&mut self, x: f64) -> Result<()> {
        check_finite(x)?;
        self.n_seen += 1;
        self.q_hat = Some(match self.q_hat {
            None if x == 0.0 => DUMIQE_ZERO_ESCAPE,
            None => x,
            Some(q_hat) if x > q_hat => q_hat + self.lambda * self.q * q_hat,
            Some(q_hat) => q_hat - self.lambda * (1.0 - self.q) * q_hat,
        });
        Ok(())
    }

    fn estimate(&self) -> Result<f64> {
        self.q_hat.ok_or(Error::NotReady { seen: 0, needed: 1 })
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
