//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or configuration
//! error, 3 drift events emitted while `--fail-on-event` is set.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchConfig, SweepOptions};
use crate::drift::{self, DriftConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    Dumiqe, EwaMean, FrugalAdditive, Qewa, QuantileTracker, DEFAULT_GAMMA_RATIO, DEFAULT_WARMUP,
};
use crate::format::fmt_f64;
use crate::input::{open_input, read_values};
use crate::streams::{self, Dynamics, Family, StreamSpec, RNG_ALGORITHM};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EVENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qewa", version, about = "Streaming quantile tracking toolkit")]
struct Cli {
    /// Seed for every randomized path.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic stream with its exact 50/70/90% quantiles.
    Gen(GenArgs),
    /// Run one estimator over numbers read from a file or stdin.
    Track(TrackArgs),
    /// Run an RMSE sweep described by a TOML config file.
    Bench(BenchArgs),
    /// Detect concept drift in a stream of prediction errors.
    Drift(DriftArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    dynamics: Dynamics,
    /// Amplitude.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    a: f64,
    /// Degrees-of-freedom offset (chi-squared only).
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    b: f64,
    /// Period.
    #[arg(long = "T", default_value_t = 100)]
    period: u64,
    /// Number of samples.
    #[arg(long = "N", default_value_t = 1000)]
    length: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorKind {
    Qewa,
    Dumiqe,
    Frugal,
    EwaMean,
}

#[derive(Debug, Args)]
struct TrackArgs {
    #[arg(long, value_enum, default_value_t = EstimatorKind::Qewa)]
    estimator: EstimatorKind,
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    /// gamma / lambda for QEWA; ignored when --gamma is given.
    #[arg(long, default_value_t = DEFAULT_GAMMA_RATIO)]
    ratio: f64,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    warmup: usize,
    /// Frugal step size.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// EWA mean rate.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Input path, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: String,
    /// Read this column of a CSV file with a header row.
    #[arg(long)]
    column: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Records CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Fill the wall_ms column (makes output run-dependent).
    #[arg(long)]
    record_timing: bool,
}

#[derive(Debug, Args)]
struct DriftArgs {
    #[arg(long, default_value_t = 0.8)]
    q: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA_RATIO)]
    ratio: f64,
    /// Samples before the first decision and after every event.
    #[arg(long, default_value_t = 96)]
    warmup: u64,
    #[arg(long, default_value_t = DEFAULT_WARMUP)]
    estimator_warmup: usize,
    /// Keep tracking after an event instead of restarting the warmup.
    #[arg(long)]
    no_reset: bool,
    #[arg(long, default_value = "-")]
    input: String,
    #[arg(long)]
    column: Option<String>,
    /// Trace CSV; stdout when omitted.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Exit with status 3 if any event fires.
    #[arg(long)]
    fail_on_event: bool,
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args, cli.seed, cli.verbose),
        Command::Track(args) => cmd_track(args),
        Command::Bench(args) => cmd_bench(args, cli.seed, cli.verbose),
        Command::Drift(args) => cmd_drift(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_RUNTIME,
            }
        }
    }
}

fn create_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(args: GenArgs, seed: Option<u64>, verbose: bool) -> Result<i32> {
    let spec = StreamSpec {
        family: args.family,
        dynamics: args.dynamics,
        a: args.a,
        b: args.b,
        period: args.period,
        length: args.length,
        seed: seed.unwrap_or(0),
    };
    spec.validate()?;
    if verbose {
        eprintln!("stream {spec} seed={} rng={RNG_ALGORITHM}", spec.seed);
    }
    let out = create_output(args.out.as_deref())?;
    streams::write_stream_csv(&spec, out)?;
    Ok(EXIT_OK)
}

fn build_tracker(args: &TrackArgs) -> Result<Box<dyn QuantileTracker>> {
    Ok(match args.estimator {
        EstimatorKind::Qewa => {
            let gamma = args.gamma.unwrap_or(args.ratio * args.lambda);
            Box::new(Qewa::new(args.q, args.lambda, gamma, args.warmup)?)
        }
        EstimatorKind::Dumiqe => Box::new(Dumiqe::new(args.q, args.lambda)?),
        EstimatorKind::Frugal => Box::new(FrugalAdditive::new(args.q, args.step)?),
        EstimatorKind::EwaMean => Box::new(EwaMean::new(args.alpha)?),
    })
}

fn cmd_track(args: TrackArgs) -> Result<i32> {
    let mut tracker = build_tracker(&args)?;
    let reader = open_input(&args.input)?;
    let values = read_values(reader, &args.input, args.column.as_deref())?;
    let mut out = create_output(args.out.as_deref())?;
    let io_err = |e| Error::io("<track output>", e);
    writeln!(out, "n,x,q_hat").map_err(io_err)?;
    for (i, x) in values.into_iter().enumerate() {
        tracker.observe(x)?;
        let q_hat = tracker
            .estimate()
            .map(fmt_f64)
            .unwrap_or_else(|_| "NA".to_string());
        writeln!(out, "{},{},{}", i + 1, fmt_f64(x), q_hat).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_bench(args: BenchArgs, seed: Option<u64>, verbose: bool) -> Result<i32> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let config = BenchConfig::from_toml_str(&text, seed)?;
    if args.jobs == Some(0) {
        return Err(Error::config("--jobs must be at least 1"));
    }
    if verbose {
        eprintln!(
            "{} records over {} stream(s), rng={RNG_ALGORITHM}",
            config.record_count()?,
            config.streams.len()
        );
    }
    let records = bench::run_sweep(
        &config,
        SweepOptions {
            jobs: args.jobs,
            record_timing: args.record_timing,
        },
    )?;
    let out = create_output(args.out.as_deref())?;
    bench::write_records_to(&records, out)?;
    for line in bench::summary_lines(&records) {
        eprintln!("{line}");
    }
    Ok(EXIT_OK)
}

fn cmd_drift(args: DriftArgs) -> Result<i32> {
    if !(args.ratio > 0.0) {
        return Err(Error::config("--ratio must be positive"));
    }
    let config = DriftConfig {
        q: args.q,
        threshold: args.threshold,
        warmup_samples: args.warmup,
        lambda: args.lambda,
        gamma: args.ratio * args.lambda,
        estimator_warmup: args.estimator_warmup,
        reset_on_event: !args.no_reset,
    };
    config.validate()?;
    let run = drift::run_drift_file(&args.input, args.column.as_deref(), &config)?;

    let trace_out = create_output(args.trace_out.as_deref())?;
    drift::write_trace(&run.trace, trace_out)?;
    if let Some(path) = &args.events_out {
        drift::write_events(&run.events, create_output(Some(path))?)?;
    }
    eprintln!(
        "{} sample(s), {} drift event(s)",
        run.trace.len(),
        run.events.len()
    );
    if args.fail_on_event && !run.events.is_empty() {
        return Ok(EXIT_EVENT);
    }
    Ok(EXIT_OK)
}
