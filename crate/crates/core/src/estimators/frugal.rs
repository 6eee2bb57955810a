use super::QuantileTracker;
use crate::error::{check_finite, check_unit_open, Error, Result};

/// Additive sign-driven estimator with a fixed step: `+step * q` above the
/// estimate, `-step * (1 - q)` at or below it.
#[derive(Debug, Clone, PartialEq)]
pub struct FrugalAdditive {
    q: f64,
    step: f64,
    q_hat: Option<f64>,
    n_seen: u64,
}

impl FrugalAdditive {
    /// The first observation seeds the estimate.
    pub fn new(q: f64, step: f64) -> Result<Self> {
        check_unit_open("q", q)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::config(format!("step must be positive, got {step}")));
        }
        Ok(FrugalAdditive {
            q,
            step,
            q_hat: None,
            n_seen: 0,
        })
    }

    pub fn with_estimate(q: f64, step: f64, q_hat: f64) -> Result<Self> {
        if !q_hat.is_finite() {
            return Err(Error::config("initial estimate must be finite"));
        }
        let mut est = Self::new(q, step)?;
        est.q_hat = Some(q_hat);
        Ok(est)
    }

    pub fn step(&self) -> f64 {
        self.step
    }
}

impl QuantileTracker for FrugalAdditive {
    fn observe(&mut self, x: f64) -> Result<()> {
        check_finite(x)?;
        self.n_seen += 1;
        self.q_hat = Some(match self.q_hat {
            None => x,
            Some(q_hat) if x > q_hat => q_hat + self.step * self.q,
            Some(q_hat) => q_hat - self.step * (1.0 - self.q),
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_steps() {
        let mut up = FrugalAdditive::with_estimate(0.7, 0.1, 0.0).unwrap();
        up.observe(5.0).unwrap();
        assert!((up.estimate().unwrap() - 0.07).abs() < 1e-15);

        let mut down = FrugalAdditive::with_estimate(0.7, 0.1, 0.0).unwrap();
        down.observe(-5.0).unwrap();
        assert!((down.estimate().unwrap() + 0.03).abs() < 1e-15);
    }

    #[test]
    fn validates_step() {
        assert!(FrugalAdditive::new(0.5, 0.0).is_err());
        assert!(FrugalAdditive::new(0.5, f64::INFINITY).is_err());
        assert!(FrugalAdditive::new(1.2, 0.1).is_err());
    }
}
