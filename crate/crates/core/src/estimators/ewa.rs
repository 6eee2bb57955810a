use super::QuantileTracker;
use crate::error::{check_finite, check_unit_open, Error, Result};

/// Exponentially weighted average of observations.
///
/// The first observation becomes the estimate; afterwards
/// `mu <- (1 - alpha) * mu + alpha * x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EwaMean {
    alpha: f64,
    mu_hat: Option<f64>,
    n_seen: u64,
}

impl EwaMean {
    pub fn new(alpha: f64) -> Result<Self> {
        check_unit_open("alpha", alpha)?;
        Ok(EwaMean {
            alpha,
            mu_hat: None,
            n_seen: 0,
        })
    }

    pub fn with_estimate(alpha: f64, mu_hat: f64) -> Result<Self> {
        if !mu_hat.is_finite() {
            return Err(Error::config("initial estimate must be finite"));
        }
        let mut est = Self::new(alpha)?;
        est.mu_hat = Some(mu_hat);
        Ok(est)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl QuantileTracker for EwaMean {
    fn observe(&mut self, x: f64) -> Result<()> {
        check_finite(x)?;
        self.n_seen += 1;
        self.mu_hat = Some(match self.mu_hat {
            None => x,
            // mu + alpha * (x - mu): exact fixed point on constant input
            Some(mu) => mu + self.alpha * (x - mu),
        });
        Ok(())
    }

    fn estimate(&self) -> Result<f64> {
        self.mu_hat.ok_or(Error::NotReady { seen: 0, needed: 1 })
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}
