use super::QuantileTracker;
use crate::error::{check_finite, check_unit_open, Error, Result};

/// Default number of buffered samples used to seed the state.
pub const DEFAULT_WARMUP: usize = 10;

/// Default ratio between the conditional-mean rate and the quantile step size.
pub const DEFAULT_GAMMA_RATIO: f64 = 1e-2;

const MIN_GAP_REL: f64 = 1e-8;
const FALLBACK_GAP_REL: f64 = 1e-6;

/// Weights used by a single tracking update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepWeights {
    /// Asymmetry weight computed from the conditional-mean gaps, in (0, 1).
    pub a: f64,
    /// Convex-combination weight applied to the observation, in (0, lambda).
    pub b: f64,
    /// Whether the observation was strictly above the previous estimate.
    pub above: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    Warming(Vec<f64>),
    Tracking {
        q_hat: f64,
        mu_plus: f64,
        mu_minus: f64,
    },
}

/// Quantile tracker built on a generalized exponentially weighted average.
///
/// Every update is the convex combination `(1 - b) * q_hat + b * x`, where
/// `b` depends on which side of the estimate `x` falls and on how far the
/// running conditional means `mu_plus` (above) and `mu_minus` (below) sit
/// from the estimate. Large misses therefore produce large steps.
///
/// The first `warmup` observations are buffered; the state is seeded from
/// their empirical quantile and conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct Qewa {
    q: f64,
    lambda: f64,
    gamma: f64,
    warmup: usize,
    n_seen: u64,
    phase: Phase,
}

impl Qewa {
    pub fn new(q: f64, lambda: f64, gamma: f64, warmup: usize) -> Result<Self> {
        check_unit_open("q", q)?;
        check_unit_open("lambda", lambda)?;
        check_unit_open("gamma", gamma)?;
        if warmup == 0 {
            return Err(Error::config("warmup must be at least 1"));
        }
        Ok(Qewa {
            q,
            lambda,
            gamma,
            warmup,
            n_seen: 0,
            phase: Phase::Warming(Vec::with_capacity(warmup)),
        })
    }

    /// Like [`Qewa::new`] with `gamma = ratio * lambda`.
    pub fn with_ratio(q: f64, lambda: f64, ratio: f64, warmup: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return Err(Error::config(format!("ratio must be positive, got {ratio}")));
        }
        Self::new(q, lambda, ratio * lambda, warmup)
    }

    /// Build an already-initialized tracker from explicit state.
    ///
    /// Requires `mu_minus < q_hat < mu_plus`.
    pub fn from_state(
        q: f64,
        lambda: f64,
        gamma: f64,
        q_hat: f64,
        mu_plus: f64,
        mu_minus: f64,
    ) -> Result<Self> {
        let mut est = Self::new(q, lambda, gamma, 1)?;
        for v in [q_hat, mu_plus, mu_minus] {
            if !v.is_finite() {
                return Err(Error::config("initial state must be finite"));
            }
        }
        if !(mu_minus < q_hat && q_hat < mu_plus) {
            return Err(Error::config(format!(
                "initial state must satisfy mu_minus < q_hat < mu_plus, got {mu_minus} / {q_hat} / {mu_plus}"
            )));
        }
        est.phase = Phase::Tracking {
            q_hat,
            mu_plus,
            mu_minus,
        };
        Ok(est)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn is_ready(&self) -> bool {
        matches!(self.phase, Phase::Tracking { .. })
    }

    pub fn q_hat(&self) -> Option<f64> {
        match self.phase {
            Phase::Tracking { q_hat, .. } => Some(q_hat),
            Phase::Warming(_) => None,
        }
    }

    pub fn mu_plus(&self) -> Option<f64> {
        match self.phase {
            Phase::Tracking { mu_plus, .. } => Some(mu_plus),
            Phase::Warming(_) => None,
        }
    }

    pub fn mu_minus(&self) -> Option<f64> {
        match self.phase {
            Phase::Tracking { mu_minus, .. } => Some(mu_minus),
            Phase::Warming(_) => None,
        }
    }

    /// Drop the tracked state and start buffering warmup samples again.
    /// Tuning parameters and the observation counter are kept.
    pub fn reset(&mut self) {
        self.phase = Phase::Warming(Vec::with_capacity(self.warmup));
    }

    /// Consume `x` and report the weights used, or `None` if `x` went into
    /// the warmup buffer.
    pub fn observe_traced(&mut self, x: f64) -> Result<Option<StepWeights>> {
        check_finite(x)?;
        self.n_seen += 1;
        match &mut self.phase {
            Phase::Warming(buf) => {
                buf.push(x);
                if buf.len() >= self.warmup {
                    let (q_hat, mu_plus, mu_minus) = seed_state(buf, self.q);
                    self.phase = Phase::Tracking {
                        q_hat,
                        mu_plus,
                        mu_minus,
                    };
                }
                Ok(None)
            }
            Phase::Tracking {
                q_hat,
                mu_plus,
                mu_minus,
            } => {
                let a = asymmetry_weight(self.q, *q_hat, *mu_plus, *mu_minus);
                let above = x > *q_hat;
                let b = if above {
                    self.lambda * a
                } else {
                    self.lambda * (1.0 - a)
                };
                // Same as (1 - b) q_hat + b x, but exact when x == q_hat. The
                // clamp absorbs rounding at the hull boundary.
                let next = (*q_hat + b * (x - *q_hat)).clamp(q_hat.min(x), q_hat.max(x));
                let shift = next - *q_hat;
                if above {
                    *mu_plus = shift + (1.0 - self.gamma) * *mu_plus + self.gamma * x;
                    *mu_minus += shift;
                } else {
                    *mu_plus += shift;
                    *mu_minus = shift + (1.0 - self.gamma) * *mu_minus + self.gamma * x;
                }
                *q_hat = next;
                enforce_ordering(*q_hat, mu_plus, mu_minus);
                Ok(Some(StepWeights { a, b, above }))
            }
        }
    }
}

impl QuantileTracker for Qewa {
    fn observe(&mut self, x: f64) -> Result<()> {
        self.observe_traced(x).map(|_| ())
    }

    fn estimate(&self) -> Result<f64> {
        match &self.phase {
            Phase::Tracking { q_hat, .. } => Ok(*q_hat),
            Phase::Warming(buf) => Err(Error::NotReady {
                seen: buf.len(),
                needed: self.warmup,
            }),
        }
    }

    /// During warmup this is the empirical quantile of the buffered samples.
    fn provisional(&self) -> Option<f64> {
        match &self.phase {
            Phase::Tracking { q_hat, .. } => Some(*q_hat),
            Phase::Warming(buf) if buf.is_empty() => None,
            Phase::Warming(buf) => {
                let mut sorted = buf.clone();
                sorted.sort_by(f64::total_cmp);
                Some(empirical_quantile(&sorted, self.q))
            }
        }
    }

    fn n_seen(&self) -> u64 {
        self.n_seen
    }
}

/// `a = (q / g+) / (q / g+ + (1 - q) / g-)` with `g+ = mu_plus - q_hat` and
/// `g- = q_hat - mu_minus`, written without the reciprocals.
fn asymmetry_weight(q: f64, q_hat: f64, mu_plus: f64, mu_minus: f64) -> f64 {
    let gap_plus = mu_plus - q_hat;
    let gap_minus = q_hat - mu_minus;
    let up = q * gap_minus;
    up / (up + (1.0 - q) * gap_plus)
}

fn min_gap(q_hat: f64) -> f64 {
    MIN_GAP_REL * q_hat.abs().max(1.0)
}

fn enforce_ordering(q_hat: f64, mu_plus: &mut f64, mu_minus: &mut f64) {
    let gap = min_gap(q_hat);
    if *mu_plus < q_hat + gap {
        *mu_plus = q_hat + gap;
    }
    if *mu_minus > q_hat - gap {
        *mu_minus = q_hat - gap;
    }
}

/// Empirical quantile of an ascending slice, interpolating linearly between
/// order statistics at position `(n - 1) * q`.
///
/// Panics on an empty slice.
pub fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "empirical quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn seed_state(buf: &[f64], q: f64) -> (f64, f64, f64) {
    let mut sorted = buf.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q_hat = empirical_quantile(&sorted, q);

    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = if sorted.len() > 1 {
        (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let fallback = sd.max(FALLBACK_GAP_REL * q_hat.abs().max(1.0));

    let side_mean = |pred: &dyn Fn(f64) -> bool| {
        let (sum, count) = sorted
            .iter()
            .filter(|&&v| pred(v))
            .fold((0.0, 0usize), |(s, c), &v| (s + v, c + 1));
        (count > 0).then(|| sum / count as f64)
    };
    let mut mu_plus = side_mean(&|v| v > q_hat).unwrap_or(q_hat + fallback);
    let mut mu_minus = side_mean(&|v| v < q_hat).unwrap_or(q_hat - fallback);
    enforce_ordering(q_hat, &mut mu_plus, &mut mu_minus);
    (q_hat, mu_plus, mu_minus)
}
