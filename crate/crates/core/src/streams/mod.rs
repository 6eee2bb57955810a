//! Seedable synthetic streams whose distribution drifts over time, together
//! with the exact time-varying quantile of each stream.
//!
//! Two families are supported: `N(mu_n, 1)` and `chi2(nu_n)`. The location
//! `mu_n` (or degrees of freedom `nu_n`) follows one of three dynamics:
//!
//! * periodic: `a * sin(2 pi n / T)` (plus `b` for chi-squared),
//! * switch: `+a` while `n mod T <= T / 2`, `-a` otherwise (plus `b`),
//! * stationary: constant `a` (normal) or `b` (chi-squared).
//!
//! Sample indices start at 1.

mod special;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_unit_open, Error, Result};
use crate::format::fmt_f64;

pub use special::{
    chi2_cdf, chi2_quantile, normal_cdf, normal_quantile, regularized_gamma_p,
};

/// Identifier of the generator behind every sampled stream.
pub const RNG_ALGORITHM: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

pub type StreamRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    ChiSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamics {
    Periodic,
    Switch,
    Stationary,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::ChiSquared => "chi_squared",
        }
    }
}

impl Dynamics {
    pub fn as_str(self) -> &'static str {
        match self {
            Dynamics::Periodic => "periodic",
            Dynamics::Switch => "switch",
            Dynamics::Stationary => "stationary",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Family::Normal),
            "chi_squared" | "chi2" => Ok(Family::ChiSquared),
            other => Err(Error::config(format!("unknown stream family {other:?}"))),
        }
    }
}

impl FromStr for Dynamics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Dynamics::Periodic),
            "switch" => Ok(Dynamics::Switch),
            "stationary" => Ok(Dynamics::Stationary),
            other => Err(Error::config(format!("unknown stream dynamics {other:?}"))),
        }
    }
}

/// Declarative description of a synthetic stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub family: Family,
    pub dynamics: Dynamics,
    /// Amplitude.
    pub a: f64,
    /// Offset of the degrees of freedom; ignored for the normal family.
    pub b: f64,
    /// Period `T`.
    pub period: u64,
    /// Number of samples `N`.
    pub length: u64,
    pub seed: u64,
}

impl StreamSpec {
    pub fn new(family: Family, dynamics: Dynamics) -> Self {
        StreamSpec {
            family,
            dynamics,
            a: 2.0,
            b: 6.0,
            period: 100,
            length: 1_000_000,
            seed: 0,
        }
    }

    pub fn with_period(mut self, period: u64) -> Self {
        self.period = period;
        self
    }

    pub fn with_length(mut self, length: u64) -> Self {
        self.length = length;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_amplitude(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_offset(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.period < 2 {
            return Err(Error::config(format!("period must be at least 2, got {}", self.period)));
        }
        if self.length < 1 {
            return Err(Error::config("stream length must be at least 1"));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::config("amplitude and offset must be finite"));
        }
        if self.family == Family::ChiSquared && self.b <= self.a.abs() {
            return Err(Error::config(format!(
                "chi-squared streams need b > |a| so the degrees of freedom stay positive, got a={}, b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Short identifier such as `normal-switch-T100`.
    pub fn id(&self) -> String {
        format!(
            "{}-{}-T{}",
            self.family.as_str(),
            self.dynamics.as_str(),
            self.period
        )
    }

    /// Indices where the location parameter changes value (switch dynamics
    /// only), in ascending order, restricted to `2..=length`.
    pub fn switch_points(&self) -> Vec<u64> {
        if self.dynamics != Dynamics::Switch {
            return Vec::new();
        }
        (2..=self.length)
            .filter(|&n| param_at(self, n) != param_at(self, n - 1))
            .collect()
    }
}

impl fmt::Display for StreamSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Location parameter at sample `n`: the mean for the normal family, the
/// degrees of freedom for chi-squared.
pub fn param_at(spec: &StreamSpec, n: u64) -> f64 {
    let shift = match spec.family {
        Family::Normal => 0.0,
        Family::ChiSquared => spec.b,
    };
    let t = spec.period;
    let phase = n % t;
    let level = match spec.dynamics {
        Dynamics::Periodic => {
            spec.a * (2.0 * std::f64::consts::PI * phase as f64 / t as f64).sin()
        }
        Dynamics::Switch => {
            if phase as f64 <= t as f64 / 2.0 {
                spec.a
            } else {
                -spec.a
            }
        }
        Dynamics::Stationary => match spec.family {
            Family::Normal => spec.a,
            Family::ChiSquared => 0.0,
        },
    };
    level + shift
}

/// One draw from the stream distribution at index `n`.
pub fn sample_at<R: rand::Rng + ?Sized>(spec: &StreamSpec, n: u64, rng: &mut R) -> f64 {
    let param = param_at(spec, n);
    match spec.family {
        Family::Normal => {
            let z: f64 = StandardNormal.sample(rng);
            param + z
        }
        Family::ChiSquared => Gamma::new(0.5 * param, 2.0)
            .expect("validated spec keeps the degrees of freedom positive")
            .sample(rng),
    }
}

/// Iterator over `(n, x_n)` for `n = 1..=length`.
pub struct StreamSampler {
    spec: StreamSpec,
    rng: StreamRng,
    next: u64,
}

impl StreamSampler {
    pub fn new(spec: StreamSpec) -> Result<Self> {
        spec.validate()?;
        let rng = rng_from_seed(spec.seed);
        Ok(StreamSampler { spec, rng, next: 1 })
    }
}

impl Iterator for StreamSampler {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next > self.spec.length {
            return None;
        }
        let n = self.next;
        self.next += 1;
        Some((n, sample_at(&self.spec, n, &mut self.rng)))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.spec.length + 1 - self.next) as usize;
        (left, Some(left))
    }
}

/// Every sample of the stream, in order.
pub fn sample_path(spec: &StreamSpec) -> Result<Vec<f64>> {
    Ok(StreamSampler::new(spec.clone())?.map(|(_, x)| x).collect())
}

/// The exact quantile `Q_n(q)` of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleQuantile {
    pub spec: StreamSpec,
    pub q: f64,
}

impl OracleQuantile {
    pub fn new(spec: StreamSpec, q: f64) -> Result<Self> {
        check_unit_open("q", q)?;
        spec.validate()?;
        Ok(OracleQuantile { spec, q })
    }
}

pub fn true_quantile_at(oracle: &OracleQuantile, n: u64) -> Result<f64> {
    let param = param_at(&oracle.spec, n);
    match oracle.spec.family {
        Family::Normal => Ok(param + normal_quantile(oracle.q)?),
        Family::ChiSquared => chi2_quantile(oracle.q, param),
    }
}

/// Precomputed oracle values, one per phase of the period.
#[derive(Debug, Clone)]
pub struct OracleTable {
    period: u64,
    values: Vec<f64>,
}

impl OracleTable {
    pub fn new(oracle: &OracleQuantile) -> Result<Self> {
        let period = oracle.spec.period;
        let values = (0..period)
            .map(|phase| true_quantile_at(oracle, phase))
            .collect::<Result<Vec<_>>>()?;
        Ok(OracleTable { period, values })
    }

    pub fn at(&self, n: u64) -> f64 {
        self.values[(n % self.period) as usize]
    }
}

/// Quantile levels written by [`write_stream_csv`].
pub const GEN_QUANTILES: [f64; 3] = [0.5, 0.7, 0.9];

/// Write `n,x,true_q50,true_q70,true_q90` rows for the whole stream.
pub fn write_stream_csv<W: Write>(spec: &StreamSpec, mut out: W) -> Result<()> {
    let io_err = |e| Error::io("<stream output>", e);
    let tables = GEN_QUANTILES
        .iter()
        .map(|&q| OracleTable::new(&OracleQuantile::new(spec.clone(), q)?))
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "n,x,true_q50,true_q70,true_q90").map_err(io_err)?;
    for (n, x) in StreamSampler::new(spec.clone())? {
        writeln!(
            out,
            "{},{},{},{},{}",
            n,
            fmt_f64(x),
            fmt_f64(tables[0].at(n)),
            fmt_f64(tables[1].at(n)),
            fmt_f64(tables[2].at(n)),
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, dynamics: Dynamics) -> StreamSpec {
        StreamSpec::new(family, dynamics)
    }

    #[test]
    fn periodic_peak_and_trough() {
        let s = spec(Family::Normal, Dynamics::Periodic);
        assert!((param_at(&s, 25) - 2.0).abs() < 1e-15);
        let c = spec(Family::ChiSquared, Dynamics::Periodic);
        assert!((param_at(&c, 75) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn switch_levels() {
        let s = spec(Family::Normal, Dynamics::Switch);
        assert_eq!(param_at(&s, 10), 2.0);
        assert_eq!(param_at(&s, 50), 2.0);
        assert_eq!(param_at(&s, 51), -2.0);
        assert_eq!(param_at(&s, 60), -2.0);
        assert_eq!(param_at(&s, 100), 2.0);
        let c = spec(Family::ChiSquared, Dynamics::Switch);
        assert_eq!(param_at(&c, 10), 8.0);
        assert_eq!(param_at(&c, 60), 4.0);
    }

    #[test]
    fn stationary_levels() {
        assert_eq!(param_at(&spec(Family::Normal, Dynamics::Stationary), 7), 2.0);
        assert_eq!(param_at(&spec(Family::ChiSquared, Dynamics::Stationary), 7), 6.0);
    }

    #[test]
    fn switch_points_follow_boundary_rule() {
        let s = spec(Family::Normal, Dynamics::Switch).with_length(300);
        assert_eq!(s.switch_points(), vec![51, 100, 151, 200, 251, 300]);
        assert!(spec(Family::Normal, Dynamics::Periodic).switch_points().is_empty());
    }

    #[test]
    fn validation() {
        assert!(spec(Family::Normal, Dynamics::Periodic).validate().is_ok());
        assert!(spec(Family::ChiSquared, Dynamics::Switch)
            .with_amplitude(7.0)
            .validate()
            .is_err());
        assert!(spec(Family::ChiSquared, Dynamics::Switch)
            .with_amplitude(-6.0)
            .validate()
            .is_err());
        assert!(spec(Family::Normal, Dynamics::Switch).with_period(1).validate().is_err());
        assert!(spec(Family::Normal, Dynamics::Switch).with_length(0).validate().is_err());
    }

    #[test]
    fn sampler_is_deterministic() {
        let s = spec(Family::ChiSquared, Dynamics::Periodic).with_length(500).with_seed(9);
        assert_eq!(sample_path(&s).unwrap(), sample_path(&s).unwrap());
        let other = sample_path(&s.clone().with_seed(10)).unwrap();
        assert_ne!(sample_path(&s).unwrap(), other);
    }

    #[test]
    fn oracle_values() {
        let normal = OracleQuantile::new(spec(Family::Normal, Dynamics::Stationary), 0.5).unwrap();
        assert_eq!(true_quantile_at(&normal, 3).unwrap(), 2.0);
        let table = OracleTable::new(&normal).unwrap();
        assert_eq!(table.at(12345), 2.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("chi_squared".parse::<Family>().unwrap(), Family::ChiSquared);
        assert_eq!("switch".parse::<Dynamics>().unwrap(), Dynamics::Switch);
        assert!("gamma".parse::<Family>().is_err());
    }
}
