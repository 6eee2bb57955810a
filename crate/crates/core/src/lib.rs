//! Streaming quantile tracking for non-stationary data.
//!
//! The centerpiece is [`estimators::Qewa`], a quantile tracker written as an
//! exponentially weighted average of observations with a per-sample weight.
//! Around it the crate provides baseline estimators, synthetic drifting
//! streams with exact quantile oracles, an RMSE benchmark harness and a
//! threshold-based concept-drift detector.

// `!(x > 0.0)` is used on purpose so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod drift;
pub mod error;
pub mod estimators;
pub mod format;
pub mod input;
pub mod streams;

pub use error::{Error, Result};
pub use estimators::{Dumiqe, EwaMean, FrugalAdditive, Qewa, QuantileTracker};
