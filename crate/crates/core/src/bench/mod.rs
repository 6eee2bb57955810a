//! RMSE benchmark harness.
//!
//! Every estimator configuration is run over a synthetic stream and scored
//! against the exact quantile `Q_n(q)`:
//!
//! ```text
//! RMSE = sqrt( 1/N' * sum_n (Q_n(q) - Qhat_n(q))^2 )
//! ```
//!
//! where `Qhat_n` is the estimate after consuming `x_n` and the sum runs over
//! the `N' = N - burn_in` scored samples. While an estimator is still warming
//! up, its provisional estimate (the quantile of its buffer) is scored.
//!
//! On switch streams the harness also measures the mean number of steps
//! after each switch until the estimate first enters a `delta` band around
//! the new quantile.

mod config;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{
    default_alpha_grid, default_lambda_grid, default_ratio_grid, default_step_grid, BenchConfig,
    EstimatorGrid, EstimatorParams, Grid, DEFAULT_LENGTH, DEFAULT_QUANTILES,
    DEFAULT_RECOVERY_DELTA,
};

use crate::error::{Error, Result};
use crate::estimators::{Dumiqe, EwaMean, FrugalAdditive, Qewa, QuantileTracker};
use crate::format::fmt_f64;
use crate::streams::{sample_path, Dynamics, OracleQuantile, OracleTable, StreamSpec};

/// One row of benchmark output.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub estimator: String,
    pub params: String,
    pub stream: String,
    pub q: f64,
    /// NaN when `failed`.
    pub rmse: f64,
    pub recovery_time: Option<f64>,
    pub failed: bool,
    pub wall_ms: Option<f64>,
}

pub const RECORD_HEADER: [&str; 8] = [
    "estimator",
    "params",
    "stream",
    "q",
    "rmse",
    "recovery_time",
    "failed",
    "wall_ms",
];

/// Result of running one estimator over one sample path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub rmse: f64,
    pub failed: bool,
    pub recovery_time: Option<f64>,
}

/// Estimator that always reports the exact quantile. Used to validate the
/// harness itself.
#[derive(Debug, Clone)]
pub struct Clairvoyant {
    table: OracleTable,
    n: u64,
}

impl Clairvoyant {
    pub fn new(table: OracleTable) -> Self {
        Clairvoyant { table, n: 0 }
    }
}

impl QuantileTracker for Clairvoyant {
    fn observe(&mut self, x: f64) -> Result<()> {
        crate::error::check_finite(x)?;
        self.n += 1;
        Ok(())
    }

    fn estimate(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::NotReady { seen: 0, needed: 1 });
        }
        Ok(self.table.at(self.n))
    }

    fn n_seen(&self) -> u64 {
        self.n
    }
}

/// Instantiate an estimator for quantile level `q`. Clairvoyant estimators
/// need the oracle table of the stream they will see.
pub fn build_estimator(
    params: &EstimatorParams,
    q: f64,
    oracle: Option<&OracleTable>,
) -> Result<Box<dyn QuantileTracker + Send>> {
    Ok(match *params {
        EstimatorParams::Qewa {
            lambda,
            gamma,
            warmup,
        } => Box::new(Qewa::new(q, lambda, gamma, warmup)?),
        EstimatorParams::Dumiqe { lambda } => Box::new(Dumiqe::new(q, lambda)?),
        EstimatorParams::Frugal { step } => Box::new(FrugalAdditive::new(q, step)?),
        EstimatorParams::EwaMean { alpha } => Box::new(EwaMean::new(alpha)?),
        EstimatorParams::Clairvoyant => {
            let table = oracle
                .ok_or_else(|| Error::config("clairvoyant estimator needs an oracle table"))?;
            Box::new(Clairvoyant::new(table.clone()))
        }
    })
}

struct RecoveryPlan<'a> {
    switch_points: &'a [u64],
    delta: f64,
    period: u64,
}

fn evaluate<E: QuantileTracker + ?Sized>(
    samples: &[f64],
    oracle: &OracleTable,
    est: &mut E,
    burn_in: u64,
    recovery: Option<RecoveryPlan<'_>>,
) -> Evaluation {
    let failed = Evaluation {
        rmse: f64::NAN,
        failed: true,
        recovery_time: None,
    };
    let mut sum_sq = 0.0;
    let mut scored = 0u64;

    let mut next_switch = 0usize;
    // (epoch start, recovered)
    let mut epoch: Option<(u64, bool)> = None;
    let mut recovery_sum = 0.0;
    let mut epochs = 0u64;

    for (i, &x) in samples.iter().enumerate() {
        let n = i as u64 + 1;
        if est.observe(x).is_err() {
            return failed;
        }
        let estimate = match est.provisional() {
            Some(v) if v.is_finite() => v,
            _ => return failed,
        };
        let err = oracle.at(n) - estimate;
        if n > burn_in {
            sum_sq += err * err;
            scored += 1;
        }

        if let Some(plan) = &recovery {
            if plan.switch_points.get(next_switch) == Some(&n) {
                next_switch += 1;
                if let Some((_, false)) = epoch {
                    recovery_sum += plan.period as f64 / 2.0;
                    epochs += 1;
                }
                epoch = Some((n, false));
            }
            if let Some((start, recovered @ false)) = &mut epoch {
                if err.abs() <= plan.delta {
                    *recovered = true;
                    recovery_sum += (n - *start) as f64;
                    epochs += 1;
                }
            }
        }
    }
    // An unfinished final epoch that never recovered is dropped.
    Evaluation {
        rmse: if scored == 0 {
            f64::NAN
        } else {
            (sum_sq / scored as f64).sqrt()
        },
        failed: false,
        recovery_time: match recovery {
            Some(_) if epochs > 0 => Some(recovery_sum / epochs as f64),
            _ => None,
        },
    }
}

fn prepare(spec: &StreamSpec, q: f64) -> Result<(Vec<f64>, OracleTable)> {
    let samples = sample_path(spec)?;
    let table = OracleTable::new(&OracleQuantile::new(spec.clone(), q)?)?;
    Ok((samples, table))
}

/// Run `est` over the whole stream and score it against the exact quantile.
pub fn run_rmse<E: QuantileTracker + ?Sized>(
    spec: &StreamSpec,
    est: &mut E,
    q: f64,
    burn_in: u64,
) -> Result<Evaluation> {
    if burn_in >= spec.length {
        return Err(Error::config("burn_in must be smaller than the stream length"));
    }
    let (samples, table) = prepare(spec, q)?;
    Ok(evaluate(&samples, &table, est, burn_in, None))
}

/// Mean number of steps after each switch until `|Qhat_n - Q_n| <= delta`.
/// Epochs that never recover count as `T / 2`.
pub fn recovery_time<E: QuantileTracker + ?Sized>(
    spec: &StreamSpec,
    est: &mut E,
    q: f64,
    delta: f64,
) -> Result<f64> {
    if spec.dynamics != Dynamics::Switch {
        return Err(Error::config("recovery time needs a switch stream"));
    }
    if !(delta > 0.0) {
        return Err(Error::config(format!("delta must be positive, got {delta}")));
    }
    let (samples, table) = prepare(spec, q)?;
    let points = spec.switch_points();
    let plan = RecoveryPlan {
        switch_points: &points,
        delta,
        period: spec.period,
    };
    let eval = evaluate(&samples, &table, est, 0, Some(plan));
    if eval.failed {
        return Err(Error::Numeric("estimator produced a non-finite estimate".into()));
    }
    eval.recovery_time
        .ok_or_else(|| Error::config("stream contains no complete switch epoch"))
}

/// DUMIQE step size whose RMSE on `spec` matches `target_rmse` within the
/// relative tolerance `rel_tol`, found by bisection on `log(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedLambda {
    pub lambda: f64,
    pub rmse: f64,
}

pub fn match_dumiqe_lambda(
    spec: &StreamSpec,
    q: f64,
    target_rmse: f64,
    rel_tol: f64,
) -> Result<MatchedLambda> {
    let (samples, table) = prepare(spec, q)?;
    let rmse_at = |lambda: f64| -> Result<f64> {
        let mut est = Dumiqe::new(q, lambda)?;
        let eval = evaluate(&samples, &table, &mut est, 0, None);
        if eval.failed {
            Err(Error::Numeric(format!("DUMIQE failed at lambda={lambda}")))
        } else {
            Ok(eval.rmse)
        }
    };
    let (mut lo, mut hi) = (1e-6f64.ln(), 0.9f64.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let lambda = mid.exp();
        let rmse = rmse_at(lambda)?;
        if (rmse / target_rmse - 1.0).abs() <= rel_tol {
            return Ok(MatchedLambda { lambda, rmse });
        }
        if rmse < target_rmse {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!(
        "no DUMIQE step size matches RMSE {target_rmse} within {rel_tol}"
    )))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses the rayon default.
    pub jobs: Option<usize>,
    /// Fill `wall_ms`. Off by default so that output is reproducible.
    pub record_timing: bool,
}

struct Task {
    stream: usize,
    params: EstimatorParams,
    quantile: usize,
}

/// Run every (stream, estimator configuration, quantile) combination.
///
/// Each stream is sampled once and the same path is fed to every estimator.
/// Records come back in configuration order regardless of `jobs`.
pub fn run_sweep(config: &BenchConfig, opts: SweepOptions) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let mut tasks = Vec::new();
    for s in 0..config.streams.len() {
        for grid in &config.estimators {
            for params in grid.expand()? {
                for qi in 0..config.quantiles.len() {
                    tasks.push(Task {
                        stream: s,
                        params,
                        quantile: qi,
                    });
                }
            }
        }
    }

    let run = || -> Result<Vec<BenchRecord>> {
        let paths = config
            .streams
            .par_iter()
            .map(sample_path)
            .collect::<Result<Vec<_>>>()?;
        let tables = config
            .streams
            .iter()
            .map(|spec| {
                config
                    .quantiles
                    .iter()
                    .map(|&q| OracleTable::new(&OracleQuantile::new(spec.clone(), q)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let switch_points: Vec<Vec<u64>> =
            config.streams.iter().map(StreamSpec::switch_points).collect();

        tasks
            .par_iter()
            .map(|task| {
                let spec = &config.streams[task.stream];
                let q = config.quantiles[task.quantile];
                let table = &tables[task.stream][task.quantile];
                let started = Instant::now();
                let mut est = build_estimator(&task.params, q, Some(table))?;
                let plan = (spec.dynamics == Dynamics::Switch).then(|| RecoveryPlan {
                    switch_points: &switch_points[task.stream],
                    delta: config.recovery_delta,
                    period: spec.period,
                });
                let eval = evaluate(&paths[task.stream], table, &mut est, config.burn_in, plan);
                let wall_ms = started.elapsed().as_secs_f64() * 1e3;
                Ok(BenchRecord {
                    estimator: task.params.kind().to_string(),
                    params: task.params.describe(),
                    stream: spec.id(),
                    q,
                    rmse: eval.rmse,
                    recovery_time: eval.recovery_time,
                    failed: eval.failed,
                    wall_ms: opts.record_timing.then_some(wall_ms),
                })
            })
            .collect()
    };

    match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_records_to<W: std::io::Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.estimator.clone(),
            r.params.clone(),
            r.stream.clone(),
            fmt_f64(r.q),
            fmt_f64(r.rmse),
            opt_f64(r.recovery_time),
            r.failed.to_string(),
            opt_f64(r.wall_ms),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))
}

pub fn write_records(records: &[BenchRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records_to(records, std::io::BufWriter::new(file))
}

pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>> {
    let display = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(Error::Parse {
            path: display,
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let parse_err = |field: &str| Error::Parse {
            path: display.clone(),
            line,
            message: format!("bad {field} value"),
        };
        let num = |idx: usize, field: &str| -> Result<f64> {
            row[idx].parse::<f64>().map_err(|_| parse_err(field))
        };
        let opt = |idx: usize, field: &str| -> Result<Option<f64>> {
            if row[idx].is_empty() {
                Ok(None)
            } else {
                num(idx, field).map(Some)
            }
        };
        out.push(BenchRecord {
            estimator: row[0].to_string(),
            params: row[1].to_string(),
            stream: row[2].to_string(),
            q: num(3, "q")?,
            rmse: num(4, "rmse")?,
            recovery_time: opt(5, "recovery_time")?,
            failed: row[6].parse().map_err(|_| parse_err("failed"))?,
            wall_ms: opt(7, "wall_ms")?,
        });
    }
    Ok(out)
}

/// Best (lowest) RMSE per estimator kind for one stream and quantile.
#[derive(Debug, Clone, PartialEq)]
pub struct BestRmse {
    pub stream: String,
    pub q: f64,
    pub estimator: String,
    pub params: String,
    pub rmse: f64,
}

/// Minimum-over-grid RMSE for every (stream, q, estimator kind), skipping
/// failed records. Ordered by stream, then q, then estimator name.
pub fn best_per_estimator(records: &[BenchRecord]) -> Vec<BestRmse> {
    let mut best: BTreeMap<(String, u64, String), &BenchRecord> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.failed && r.rmse.is_finite()) {
        let key = (r.stream.clone(), r.q.to_bits(), r.estimator.clone());
        match best.get(&key) {
            Some(prev) if prev.rmse <= r.rmse => {}
            _ => {
                best.insert(key, r);
            }
        }
    }
    best.into_values()
        .map(|r| BestRmse {
            stream: r.stream.clone(),
            q: r.q,
            estimator: r.estimator.clone(),
            params: r.params.clone(),
            rmse: r.rmse,
        })
        .collect()
}

/// One human-readable line per stream listing the best RMSE of each
/// estimator kind at each quantile level.
pub fn summary_lines(records: &[BenchRecord]) -> Vec<String> {
    let mut per_stream: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for b in best_per_estimator(records) {
        per_stream
            .entry(b.stream.clone())
            .or_default()
            .push(format!("q={} {}={:.5}", b.q, b.estimator, b.rmse));
    }
    let failed = records.iter().filter(|r| r.failed).count();
    let mut lines: Vec<String> = per_stream
        .into_iter()
        .map(|(stream, parts)| format!("{stream}: {}", parts.join(", ")))
        .collect();
    if failed > 0 {
        lines.push(format!("{failed} record(s) flagged failed"));
    }
    lines
}
