use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A tuning parameter or stream description is outside its domain.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An observation was rejected (non-finite, out of domain).
    #[error("invalid input: {0}")]
    Input(String),

    /// The estimator is still buffering its warmup samples.
    #[error("estimator is not ready: {seen} of {needed} warmup samples observed")]
    NotReady { seen: usize, needed: usize },

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("observation {x} is not finite")))
    }
}

pub(crate) fn check_unit_open(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must lie in (0, 1), got {value}")))
    }
}
