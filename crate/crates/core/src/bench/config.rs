//! Benchmark configuration, read from TOML. See `docs/bench-config.md`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{check_unit_open, Error, Result};
use crate::estimators::DEFAULT_WARMUP;
use crate::streams::{Dynamics, Family, StreamSpec};

pub const DEFAULT_QUANTILES: [f64; 3] = [0.5, 0.7, 0.9];
pub const DEFAULT_LENGTH: u64 = 1_000_000;
pub const DEFAULT_RECOVERY_DELTA: f64 = 0.3;
pub const DEFAULT_RATIOS: [f64; 4] = [1.0, 1e-1, 1e-2, 1e-3];

/// A list of parameter values, either explicit or log-spaced.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Single(f64),
    List(Vec<f64>),
    LogSpaced { log_from: f64, log_to: f64, points: usize },
}

impl Grid {
    pub fn log_spaced(from: f64, to: f64, points: usize) -> Self {
        Grid::LogSpaced {
            log_from: from,
            log_to: to,
            points,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let values = match self {
            Grid::Single(v) => vec![*v],
            Grid::List(v) => v.clone(),
            Grid::LogSpaced {
                log_from,
                log_to,
                points,
            } => {
                if !(*log_from > 0.0 && *log_to > 0.0) || *points == 0 {
                    return Err(Error::config(
                        "log-spaced grids need positive bounds and at least one point",
                    ));
                }
                if *points == 1 {
                    vec![*log_from]
                } else {
                    let (lo, hi) = (log_from.ln(), log_to.ln());
                    (0..*points)
                        .map(|i| (lo + (hi - lo) * i as f64 / (*points - 1) as f64).exp())
                        .collect()
                }
            }
        };
        if values.is_empty() {
            return Err(Error::config("parameter grids must not be empty"));
        }
        Ok(values)
    }
}

pub fn default_lambda_grid() -> Grid {
    Grid::log_spaced(1e-3, 0.5, 30)
}

pub fn default_ratio_grid() -> Grid {
    Grid::List(DEFAULT_RATIOS.to_vec())
}

pub fn default_step_grid() -> Grid {
    Grid::log_spaced(1e-3, 2.0, 30)
}

pub fn default_alpha_grid() -> Grid {
    Grid::log_spaced(1e-3, 0.5, 30)
}

/// One estimator family with the grids its parameters are swept over.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EstimatorGrid {
    Qewa {
        #[serde(default = "default_lambda_grid")]
        lambda: Grid,
        #[serde(default = "default_ratio_grid")]
        ratio: Grid,
        #[serde(default = "default_warmup")]
        warmup: usize,
    },
    Dumiqe {
        #[serde(default = "default_lambda_grid")]
        lambda: Grid,
    },
    Frugal {
        #[serde(default = "default_step_grid")]
        step: Grid,
    },
    EwaMean {
        #[serde(default = "default_alpha_grid")]
        alpha: Grid,
    },
    /// Test double that reports the exact quantile.
    Clairvoyant,
}

fn default_warmup() -> usize {
    DEFAULT_WARMUP
}

/// A single concrete estimator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorParams {
    Qewa {
        lambda: f64,
        gamma: f64,
        warmup: usize,
    },
    Dumiqe {
        lambda: f64,
    },
    Frugal {
        step: f64,
    },
    EwaMean {
        alpha: f64,
    },
    Clairvoyant,
}

impl EstimatorParams {
    pub fn kind(&self) -> &'static str {
        match self {
            EstimatorParams::Qewa { .. } => "qewa",
            EstimatorParams::Dumiqe { .. } => "dumiqe",
            EstimatorParams::Frugal { .. } => "frugal",
            EstimatorParams::EwaMean { .. } => "ewa-mean",
            EstimatorParams::Clairvoyant => "clairvoyant",
        }
    }

    /// `key=value` pairs joined by `;`.
    pub fn describe(&self) -> String {
        use crate::format::fmt_f64 as f;
        match *self {
            EstimatorParams::Qewa {
                lambda,
                gamma,
                warmup,
            } => format!("lambda={};gamma={};warmup={warmup}", f(lambda), f(gamma)),
            EstimatorParams::Dumiqe { lambda } => format!("lambda={}", f(lambda)),
            EstimatorParams::Frugal { step } => format!("step={}", f(step)),
            EstimatorParams::EwaMean { alpha } => format!("alpha={}", f(alpha)),
            EstimatorParams::Clairvoyant => String::new(),
        }
    }
}

impl EstimatorGrid {
    pub fn expand(&self) -> Result<Vec<EstimatorParams>> {
        Ok(match self {
            EstimatorGrid::Qewa {
                lambda,
                ratio,
                warmup,
            } => {
                let ratios = ratio.values()?;
                let mut out = Vec::new();
                for r in ratios {
                    for l in lambda.values()? {
                        out.push(EstimatorParams::Qewa {
                            lambda: l,
                            gamma: r * l,
                            warmup: *warmup,
                        });
                    }
                }
                out
            }
            EstimatorGrid::Dumiqe { lambda } => lambda
                .values()?
                .into_iter()
                .map(|lambda| EstimatorParams::Dumiqe { lambda })
                .collect(),
            EstimatorGrid::Frugal { step } => step
                .values()?
                .into_iter()
                .map(|step| EstimatorParams::Frugal { step })
                .collect(),
            EstimatorGrid::EwaMean { alpha } => alpha
                .values()?
                .into_iter()
                .map(|alpha| EstimatorParams::EwaMean { alpha })
                .collect(),
            EstimatorGrid::Clairvoyant => vec![EstimatorParams::Clairvoyant],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct StreamEntry {
    family: Family,
    dynamics: Dynamics,
    #[serde(default = "default_a")]
    a: f64,
    #[serde(default = "default_b")]
    b: f64,
    #[serde(default = "default_period")]
    period: u64,
    seed: Option<u64>,
}

fn default_a() -> f64 {
    2.0
}

fn default_b() -> f64 {
    6.0
}

fn default_period() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default = "default_length")]
    n: u64,
    #[serde(default)]
    burn_in: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_quantiles")]
    quantiles: Vec<f64>,
    #[serde(default = "default_recovery_delta")]
    recovery_delta: f64,
    streams: Vec<StreamEntry>,
    estimators: Vec<EstimatorGrid>,
}

fn default_length() -> u64 {
    DEFAULT_LENGTH
}

fn default_quantiles() -> Vec<f64> {
    DEFAULT_QUANTILES.to_vec()
}

fn default_recovery_delta() -> f64 {
    DEFAULT_RECOVERY_DELTA
}

/// Fully resolved benchmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub streams: Vec<StreamSpec>,
    pub quantiles: Vec<f64>,
    pub estimators: Vec<EstimatorGrid>,
    /// Samples scored per stream.
    pub n: u64,
    /// Leading samples excluded from the RMSE.
    pub burn_in: u64,
    /// Band used for recovery times on switch streams.
    pub recovery_delta: f64,
}

impl BenchConfig {
    /// Parse a TOML document. Streams without an explicit `seed` get
    /// `base_seed + index`; `seed_override` replaces the file's `seed`.
    pub fn from_toml_str(text: &str, seed_override: Option<u64>) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::config(format!("bench config: {e}")))?;
        let base_seed = seed_override.unwrap_or(file.seed);
        let streams = file
            .streams
            .iter()
            .enumerate()
            .map(|(i, s)| StreamSpec {
                family: s.family,
                dynamics: s.dynamics,
                a: s.a,
                b: s.b,
                period: s.period,
                length: file.n,
                seed: s.seed.unwrap_or(base_seed.wrapping_add(i as u64)),
            })
            .collect();
        let config = BenchConfig {
            streams,
            quantiles: file.quantiles,
            estimators: file.estimators,
            n: file.n,
            burn_in: file.burn_in,
            recovery_delta: file.recovery_delta,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, seed_override)
    }

    pub fn validate(&self) -> Result<()> {
        if self.streams.is_empty() {
            return Err(Error::config("at least one stream is required"));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("at least one estimator is required"));
        }
        if self.quantiles.is_empty() {
            return Err(Error::config("at least one quantile level is required"));
        }
        for &q in &self.quantiles {
            check_unit_open("quantile", q)?;
        }
        if self.n == 0 {
            return Err(Error::config("n must be at least 1"));
        }
        if self.burn_in >= self.n {
            return Err(Error::config(format!(
                "burn_in ({}) must be smaller than n ({})",
                self.burn_in, self.n
            )));
        }
        if !(self.recovery_delta > 0.0) {
            return Err(Error::config("recovery_delta must be positive"));
        }
        for s in &self.streams {
            if s.length != self.n {
                return Err(Error::config("every stream must have length n"));
            }
            s.validate()?;
        }
        for e in &self.estimators {
            for p in e.expand()? {
                if p != EstimatorParams::Clairvoyant {
                    super::build_estimator(&p, 0.5, None)?;
                }
            }
        }
        Ok(())
    }

    /// Number of records a sweep over this configuration produces.
    pub fn record_count(&self) -> Result<usize> {
        let params: usize = self
            .estimators
            .iter()
            .map(|e| e.expand().map(|v| v.len()))
            .sum::<Result<usize>>()?;
        Ok(self.streams.len() * params * self.quantiles.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
n = 10000
seed = 3
quantiles = [0.7]

[[streams]]
family = "normal"
dynamics = "periodic"

[[estimators]]
kind = "qewa"
lambda = 0.01
ratio = 0.01
"#;

    #[test]
    fn parses_minimal_config() {
        let c = BenchConfig::from_toml_str(MINIMAL, None).unwrap();
        assert_eq!(c.n, 10_000);
        assert_eq!(c.streams[0].seed, 3);
        assert_eq!(c.streams[0].length, 10_000);
        assert_eq!(c.record_count().unwrap(), 1);
        let over = BenchConfig::from_toml_str(MINIMAL, Some(11)).unwrap();
        assert_eq!(over.streams[0].seed, 11);
    }

    #[test]
    fn defaults_fill_grids() {
        let text = r#"
[[streams]]
family = "chi_squared"
dynamics = "switch"
period = 500

[[estimators]]
kind = "qewa"

[[estimators]]
kind = "dumiqe"
"#;
        let c = BenchConfig::from_toml_str(text, None).unwrap();
        assert_eq!(c.n, DEFAULT_LENGTH);
        assert_eq!(c.quantiles, DEFAULT_QUANTILES.to_vec());
        assert_eq!(c.record_count().unwrap(), (120 + 30) * 3);
    }

    #[test]
    fn log_grid_endpoints() {
        let v = default_lambda_grid().values().unwrap();
        assert_eq!(v.len(), 30);
        assert!((v[0] - 1e-3).abs() < 1e-15);
        assert!((v[29] - 0.5).abs() < 1e-12);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_q = MINIMAL.replace("[0.7]", "[1.5]");
        assert!(BenchConfig::from_toml_str(&bad_q, None).is_err());
        let bad_burn = MINIMAL.replace("seed = 3", "seed = 3\nburn_in = 10000");
        assert!(BenchConfig::from_toml_str(&bad_burn, None).is_err());
        let bad_lambda = MINIMAL.replace("lambda = 0.01", "lambda = 2.0");
        assert!(BenchConfig::from_toml_str(&bad_lambda, None).is_err());
        let bad_kind = MINIMAL.replace("\"qewa\"", "\"rumiqe\"");
        assert!(BenchConfig::from_toml_str(&bad_kind, None).is_err());
        let bad_stream = MINIMAL.replace("\"normal\"", "\"chi_squared\"\na = 7.0");
        assert!(BenchConfig::from_toml_str(&bad_stream, None).is_err());
        assert!(BenchConfig::from_toml_str("n = 5", None).is_err());
    }
}
