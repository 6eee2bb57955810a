//! Concept-drift detection on a stream of prediction errors.
//!
//! The detector tracks an upper quantile of the absolute error with
//! [`Qewa`] and signals a retrain whenever the tracked quantile rises above a
//! fixed threshold. After each signal the tracker starts over, because the
//! retrained model produces a new error distribution.

use std::io::Write;

use crate::error::{check_finite, check_unit_open, Error, Result};
use crate::estimators::{Qewa, QuantileTracker, DEFAULT_GAMMA_RATIO, DEFAULT_WARMUP};
use crate::format::fmt_f64;
use crate::input::{open_input, read_values};

#[derive(Debug, Clone, PartialEq)]
pub struct DriftConfig {
    /// Tracked quantile level of the absolute error.
    pub q: f64,
    /// Error level the quantile must stay below.
    pub threshold: f64,
    /// Samples after start (and after every reset) during which no event
    /// can fire.
    pub warmup_samples: u64,
    pub lambda: f64,
    pub gamma: f64,
    /// Warmup buffer of the underlying tracker.
    pub estimator_warmup: usize,
    pub reset_on_event: bool,
}

impl Default for DriftConfig {
    /// One day of 15-minute samples before the first decision.
    fn default() -> Self {
        DriftConfig {
            q: 0.8,
            threshold: 2.0,
            warmup_samples: 96,
            lambda: 0.05,
            gamma: 0.05 * DEFAULT_GAMMA_RATIO,
            estimator_warmup: DEFAULT_WARMUP,
            reset_on_event: true,
        }
    }
}

impl DriftConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit_open("q", self.q)?;
        check_unit_open("lambda", self.lambda)?;
        check_unit_open("gamma", self.gamma)?;
        if !self.threshold.is_finite() {
            return Err(Error::config("threshold must be finite"));
        }
        if self.estimator_warmup == 0 {
            return Err(Error::config("estimator warmup must be at least 1"));
        }
        if self.warmup_samples < self.estimator_warmup as u64 {
            return Err(Error::config(format!(
                "warmup_samples ({}) must be at least the estimator warmup ({})",
                self.warmup_samples, self.estimator_warmup
            )));
        }
        Ok(())
    }

    fn tracker(&self) -> Result<Qewa> {
        Qewa::new(self.q, self.lambda, self.gamma, self.estimator_warmup)
    }
}

/// A retrain signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftEvent {
    /// 1-based index of the sample that triggered the event.
    pub sample_index: u64,
    pub quantile_estimate: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct DriftDetector {
    config: DriftConfig,
    tracker: Qewa,
    n: u64,
    since_reset: u64,
    above: bool,
}

impl DriftDetector {
    pub fn new(config: DriftConfig) -> Result<Self> {
        config.validate()?;
        let tracker = config.tracker()?;
        Ok(DriftDetector {
            config,
            tracker,
            n: 0,
            since_reset: 0,
            above: false,
        })
    }

    pub fn config(&self) -> &DriftConfig {
        &self.config
    }

    pub fn samples_seen(&self) -> u64 {
        self.n
    }

    pub fn in_warmup(&self) -> bool {
        self.since_reset < self.config.warmup_samples
    }

    /// Tracked quantile, or `None` during warmup.
    pub fn estimate(&self) -> Option<f64> {
        if self.in_warmup() {
            None
        } else {
            self.tracker.estimate().ok()
        }
    }

    /// Feed one error value; its absolute value is tracked.
    ///
    /// With `reset_on_event` every crossing above the threshold fires and
    /// restarts the warmup. Without it, an event fires only when the
    /// estimate moves from at-or-below to above the threshold.
    pub fn observe(&mut self, err: f64) -> Result<Option<DriftEvent>> {
        check_finite(err)?;
        self.tracker.observe(err.abs())?;
        self.n += 1;
        self.since_reset += 1;
        let Some(estimate) = self.estimate() else {
            return Ok(None);
        };
        if estimate <= self.config.threshold {
            self.above = false;
            return Ok(None);
        }
        if !self.config.reset_on_event && self.above {
            return Ok(None);
        }
        self.above = true;
        let event = DriftEvent {
            sample_index: self.n,
            quantile_estimate: estimate,
            threshold: self.config.threshold,
        };
        debug_assert!(event.quantile_estimate > event.threshold);
        if self.config.reset_on_event {
            self.tracker.reset();
            self.since_reset = 0;
            self.above = false;
        }
        Ok(Some(event))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: u64,
    pub err: f64,
    /// `None` while the detector is warming up.
    pub q_hat: Option<f64>,
    pub event: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DriftRun {
    pub trace: Vec<TraceRow>,
    pub events: Vec<DriftEvent>,
}

/// Run a fresh detector over `errors`.
pub fn run_drift<I>(errors: I, config: &DriftConfig) -> Result<DriftRun>
where
    I: IntoIterator<Item = f64>,
{
    let mut detector = DriftDetector::new(config.clone())?;
    let mut run = DriftRun::default();
    for err in errors {
        // The estimate is read before a possible reset so that the trace
        // shows the value that triggered the event.
        let event = detector.observe(err)?;
        let q_hat = match event {
            Some(e) => Some(e.quantile_estimate),
            None => detector.estimate(),
        };
        run.trace.push(TraceRow {
            n: detector.samples_seen(),
            err: err.abs(),
            q_hat,
            event: event.is_some(),
        });
        run.events.extend(event);
    }
    Ok(run)
}

/// Read error values from `path` (`-` for stdin; see [`crate::input`]) and
/// run the detector over them.
pub fn run_drift_file(path: &str, column: Option<&str>, config: &DriftConfig) -> Result<DriftRun> {
    config.validate()?;
    let reader = open_input(path)?;
    let values = read_values(reader, path, column)?;
    run_drift(values, config)
}

pub const TRACE_HEADER: &str = "n,err,q_hat,event";
pub const EVENTS_HEADER: &str = "sample_index,quantile_estimate,threshold";

/// `q_hat` is written as `NA` during warmup; `event` is 0 or 1.
pub fn write_trace<W: Write>(trace: &[TraceRow], mut out: W) -> Result<()> {
    let io_err = |e| Error::io("<trace output>", e);
    writeln!(out, "{TRACE_HEADER}").map_err(io_err)?;
    for row in trace {
        writeln!(
            out,
            "{},{},{},{}",
            row.n,
            fmt_f64(row.err),
            row.q_hat.map(fmt_f64).unwrap_or_else(|| "NA".to_string()),
            u8::from(row.event)
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_events<W: Write>(events: &[DriftEvent], mut out: W) -> Result<()> {
    let io_err = |e| Error::io("<events output>", e);
    writeln!(out, "{EVENTS_HEADER}").map_err(io_err)?;
    for e in events {
        writeln!(
            out,
            "{},{},{}",
            e.sample_index,
            fmt_f64(e.quantile_estimate),
            fmt_f64(e.threshold)
        )
        .map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
