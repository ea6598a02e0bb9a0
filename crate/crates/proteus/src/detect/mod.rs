//! Unsupervised anomaly detectors.
//!
//! Every detector produces a score where higher means more anomalous,
//! regardless of the algorithm's native orientation, and is binarized by
//! an empirical-quantile threshold. Fitted models are immutable; scoring
//! is read-only.

mod iforest;
mod loda;
mod lof;

pub use iforest::{IsolationForest, IsolationForestParams};
pub use loda::{LodaModel, LodaParams};
pub use lof::{LofIndex, LofParams};

use ndarray::ArrayView2;

use crate::error::{ProteusError, Result};

/// Anything able to answer "is this point anomalous?". The oversampler
/// supervises pseudo-samples through this trait, so tests can plug in
/// analytic judges and pipelines can project columns before delegating
/// to a fitted detector.
pub trait AnomalyJudge: Sync {
    fn anomaly_score(&self, x: &[f64]) -> f64;
    fn is_anomaly(&self, x: &[f64]) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    IsolationForest,
    Lof,
    Loda,
}

impl DetectorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorKind::IsolationForest => "iforest",
            DetectorKind::Lof => "lof",
            DetectorKind::Loda => "loda",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "iforest" | "if" => Ok(DetectorKind::IsolationForest),
            "lof" => Ok(DetectorKind::Lof),
            "loda" => Ok(DetectorKind::Loda),
            other => Err(ProteusError::InvalidParameter(format!(
                "unknown detector \"{other}\" (expected iforest|lof|loda)"
            ))),
        }
    }
}

#[derive(Debug)]
enum DetectorState {
    Forest(IsolationForest),
    Lof(LofIndex),
    Loda(LodaModel),
}

/// A fitted anomaly model plus, once [`DetectorModel::binarize`] has run,
/// the score threshold that turns it into a binary detector.
#[derive(Debug)]
pub struct DetectorModel {
    kind: DetectorKind,
    state: DetectorState,
    threshold: Option<f64>,
    training_scores: Vec<f64>,
}

impl DetectorModel {
    pub fn fit_isolation_forest(
        data: &ArrayView2<f64>,
        params: &IsolationForestParams,
    ) -> Result<Self> {
        let forest = IsolationForest::fit(data, params)?;
        let training_scores = (0..data.nrows())
            .map(|i| forest.score(&data.row(i).to_vec()))
            .collect();
        Ok(DetectorModel {
            kind: DetectorKind::IsolationForest,
            state: DetectorState::Forest(forest),
            threshold: None,
            training_scores,
        })
    }

    pub fn fit_lof(data: &ArrayView2<f64>, params: &LofParams) -> Result<Self> {
        let index = LofIndex::fit(data, params)?;
        let training_scores = index.training_scores().to_vec();
        Ok(DetectorModel {
            kind: DetectorKind::Lof,
            state: DetectorState::Lof(index),
            threshold: None,
            training_scores,
        })
    }

    pub fn fit_loda(data: &ArrayView2<f64>, params: &LodaParams) -> Result<Self> {
        let model = LodaModel::fit(data, params)?;
        let training_scores = (0..data.nrows())
            .map(|i| model.score(&data.row(i).to_vec()))
            .collect();
        Ok(DetectorModel {
            kind: DetectorKind::Loda,
            state: DetectorState::Loda(model),
            threshold: None,
            training_scores,
        })
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    /// Dimensionality the model was fitted on.
    pub fn dimension(&self) -> usize {
        match &self.state {
            DetectorState::Forest(f) => f.dimension(),
            DetectorState::Lof(l) => l.dimension(),
            DetectorState::Loda(l) => l.dimension(),
        }
    }

    /// Scores of the training samples, in training row order. For LOF
    /// these are the leave-self-out factors; for the other detectors
    /// they equal `score` on the training rows.
    pub fn training_scores(&self) -> &[f64] {
        &self.training_scores
    }

    /// Score an arbitrary point of the trained dimensionality.
    pub fn score(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension());
        match &self.state {
            DetectorState::Forest(f) => f.score(x),
            DetectorState::Lof(l) => l.score(x),
            DetectorState::Loda(l) => l.score(x),
        }
    }

    pub fn score_rows(&self, data: &ArrayView2<f64>) -> Vec<f64> {
        (0..data.nrows())
            .map(|i| self.score(&data.row(i).to_vec()))
            .collect()
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    /// Fix the binary threshold at the (1 - anomaly_ratio) empirical
    /// quantile of `scores` (linear interpolation) and label everything
    /// strictly above it. Ties at the threshold fall on the normal side.
    pub fn binarize(&mut self, scores: &[f64], anomaly_ratio: f64) -> Result<(f64, Vec<u8>)> {
        let (t, labels) = binarize_scores(scores, anomaly_ratio)?;
        self.threshold = Some(t);
        Ok((t, labels))
    }

    /// Per-feature responsibility scores for a single sample; LODA only.
    pub fn loda_feature_contributions(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.state {
            DetectorState::Loda(l) => Ok(l.feature_contributions(x)),
            _ => Err(ProteusError::InvalidParameter(
                "feature contributions are only available for LODA".into(),
            )),
        }
    }
}

impl AnomalyJudge for DetectorModel {
    fn anomaly_score(&self, x: &[f64]) -> f64 {
        self.score(x)
    }

    fn is_anomaly(&self, x: &[f64]) -> bool {
        let t = self
            .threshold
            .expect("binarize must run before the detector judges points");
        self.score(x) > t
    }
}

/// A judge that sees only a subset of the columns of the points it is
/// asked about. Used when the detector was fitted on a narrower feature
/// space than the dataset being explained.
pub struct ColumnSubsetJudge<'a> {
    inner: &'a DetectorModel,
    columns: Vec<usize>,
}

impl<'a> ColumnSubsetJudge<'a> {
    pub fn new(inner: &'a DetectorModel, columns: Vec<usize>) -> Result<Self> {
        if columns.len() != inner.dimension() {
            return Err(ProteusError::InvalidParameter(format!(
                "judge projection selects {} columns but the detector expects {}",
                columns.len(),
                inner.dimension()
            )));
        }
        Ok(ColumnSubsetJudge { inner, columns })
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|&j| x[j]).collect()
    }
}

impl AnomalyJudge for ColumnSubsetJudge<'_> {
    fn anomaly_score(&self, x: &[f64]) -> f64 {
        self.inner.score(&self.project(x))
    }

    fn is_anomaly(&self, x: &[f64]) -> bool {
        let t = self
            .inner
            .threshold
            .expect("binarize must run before the detector judges points");
        self.anomaly_score(x) > t
    }
}

/// Threshold + labels from raw scores; see [`DetectorModel::binarize`].
pub fn binarize_scores(scores: &[f64], anomaly_ratio: f64) -> Result<(f64, Vec<u8>)> {
    if !(anomaly_ratio > 0.0 && anomaly_ratio < 1.0) {
        return Err(ProteusError::InvalidParameter(format!(
            "anomaly_ratio must be in (0,1), got {anomaly_ratio}"
        )));
    }
    if scores.len() < 2 {
        return Err(ProteusError::InvalidData(
            "need at least 2 scores to binarize".into(),
        ));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(ProteusError::DegenerateScores);
    }
    let t = interpolated_quantile(&sorted, 1.0 - anomaly_ratio);
    let labels = scores.iter().map(|&s| u8::from(s > t)).collect();
    Ok((t, labels))
}

/// Empirical quantile with linear interpolation over a sorted slice.
pub(crate) fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}
