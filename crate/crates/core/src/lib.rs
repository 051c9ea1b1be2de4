//! Cost-sensitive early classification of time series.
//!
//! The crate is organized around the decision problem: given a time series
//! revealed prefix by prefix, decide *when* to classify so that the sum of
//! misclassification cost and delay cost is as small as possible.
//!
//! - [`cost`] — the cost setting: misclassification matrix plus delay cost,
//!   materialized per monitored timestamp.
//! - [`dataset`] — UCR-style TSV loading, z-normalization, synthetic data,
//!   stratified folds.
//! - [`classifiers`] — one probabilistic classifier per monitored timestamp
//!   (k-NN and multinomial logistic built in), out-of-fold calibration cubes.
//! - [`triggers`] — halting policies deciding act-now vs. wait: probability
//!   threshold, stopping rule, confidence-bin cost forecasting, reliability
//!   fusion, consecutive-acceptance, and a learned halting regressor.
//! - [`pipeline`] — the end-to-end early classifier and its online evaluator.
//! - [`report`] — average cost / accuracy / earliness metrics and canonical
//!   JSON reports.
//!
//! With the `parallel` feature (default) training loops and grid searches run
//! on rayon; the sequential fallback produces bit-identical results.

pub mod blob;
pub mod classifiers;
pub mod cost;
pub mod dataset;
pub mod error;
mod exec;
mod linalg;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod triggers;

pub use error::{EdmError, Result};
