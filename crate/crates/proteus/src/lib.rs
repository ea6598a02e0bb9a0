//! Reduced-dimensionality surrogate models for unsupervised anomaly
//! detectors.
//!
//! The pipeline labels a dataset with any unsupervised detector, then
//! searches a grid of (feature selector, classifier, oversampling) con-
//! figurations under a stratified, repeated, group-aware cross-validation
//! protocol. It returns a small explaining feature subset, a surrogate
//! classifier fitted on it, a bootstrap-bias-corrected estimate of its
//! out-of-sample AUC, conflict diagnostics against the detector, and
//! spider-chart visualizations of the explained samples.

pub mod data;
pub mod detect;
pub mod experiment;
pub mod metrics;
pub mod model_io;
pub mod oversample;
pub mod automl;
pub mod chart;
pub mod classify;
pub mod select;

mod error;
mod seed;

pub use error::{ProteusError, Result};
pub use seed::derive_seed;
