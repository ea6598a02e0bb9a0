//! Dataset representation and ingestion.
//!
//! A [`Dataset`] is an n×d matrix of finite reals with named columns,
//! optionally carrying gold-standard anomaly labels and group ids.
//! [`LabeledDataset`] augments it with the labels produced by an
//! unsupervised detector, which is what the supervised surrogate
//! pipeline consumes.

mod scaler;
mod split;
mod synthetic;

pub use scaler::StandardScaler;
pub use split::stratified_split;
pub use synthetic::{
    generate_synthetic, make_hics_like_parent, SyntheticBenchmark, PARENT_ANOMALIES,
    PARENT_FEATURES, PARENT_SAMPLES,
};

use std::path::Path;

use ndarray::Array2;

use crate::error::{ProteusError, Result};

/// An immutable numeric dataset: rows are samples, columns are features.
#[derive(Debug, Clone)]
pub struct Dataset {
    values: Array2<f64>,
    feature_names: Vec<String>,
    gold_labels: Option<Vec<u8>>,
    group_ids: Option<Vec<usize>>,
}

impl Dataset {
    /// Build a dataset, validating every invariant: finite entries, unique
    /// feature names, and label/group vectors matching the row count.
    pub fn new(
        values: Array2<f64>,
        feature_names: Vec<String>,
        gold_labels: Option<Vec<u8>>,
        group_ids: Option<Vec<usize>>,
    ) -> Result<Self> {
        let (n, d) = values.dim();
        if feature_names.len() != d {
            return Err(ProteusError::InvalidData(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                d
            )));
        }
        for (j, name) in feature_names.iter().enumerate() {
            if feature_names[..j].contains(name) {
                return Err(ProteusError::InvalidData(format!(
                    "duplicate feature name \"{name}\""
                )));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos / d.max(1), pos % d.max(1));
            return Err(ProteusError::InvalidData(format!(
                "non-finite value at row {r}, column {c}"
            )));
        }
        if let Some(ref g) = gold_labels {
            if g.len() != n {
                return Err(ProteusError::InvalidData(format!(
                    "{} gold labels for {} rows",
                    g.len(),
                    n
                )));
            }
            if let Some(bad) = g.iter().find(|&&v| v > 1) {
                return Err(ProteusError::InvalidData(format!(
                    "gold label {bad} is not binary"
                )));
            }
        }
        if let Some(ref g) = group_ids {
            if g.len() != n {
                return Err(ProteusError::InvalidData(format!(
                    "{} group ids for {} rows",
                    g.len(),
                    n
                )));
            }
        }
        Ok(Dataset {
            values,
            feature_names,
            gold_labels,
            group_ids,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn gold_labels(&self) -> Option<&[u8]> {
        self.gold_labels.as_deref()
    }

    pub fn group_ids(&self) -> Option<&[usize]> {
        self.group_ids.as_deref()
    }

    /// Row as a contiguous slice (datasets are always standard layout).
    pub fn row(&self, i: usize) -> &[f64] {
        row_slice(&self.values, i)
    }

    /// New dataset keeping only the given rows, in the given order.
    pub fn subset_rows(&self, rows: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut out = Array2::zeros((rows.len(), d));
        for (k, &r) in rows.iter().enumerate() {
            out.row_mut(k).assign(&self.values.row(r));
        }
        Dataset {
            values: out,
            feature_names: self.feature_names.clone(),
            gold_labels: self
                .gold_labels
                .as_ref()
                .map(|g| rows.iter().map(|&r| g[r]).collect()),
            group_ids: self
                .group_ids
                .as_ref()
                .map(|g| rows.iter().map(|&r| g[r]).collect()),
        }
    }

    /// Replace the value matrix, keeping names and side information.
    /// The new matrix must have the same shape.
    pub fn with_values(&self, values: Array2<f64>) -> Result<Dataset> {
        if values.dim() != self.values.dim() {
            return Err(ProteusError::InvalidData(
                "replacement matrix has a different shape".into(),
            ));
        }
        Dataset::new(
            values,
            self.feature_names.clone(),
            self.gold_labels.clone(),
            self.group_ids.clone(),
        )
    }
}

/// View row `i` of a standard-layout matrix as a slice.
pub fn row_slice(m: &Array2<f64>, i: usize) -> &[f64] {
    let d = m.ncols();
    &m.as_slice().expect("matrix must be standard layout")[i * d..(i + 1) * d]
}

/// A dataset enriched with the binary labels and raw scores of a fitted
/// unsupervised detector.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub data: Dataset,
    pub detector_labels: Vec<u8>,
    pub detector_scores: Vec<f64>,
    pub threshold: f64,
}

impl LabeledDataset {
    pub fn new(
        data: Dataset,
        detector_labels: Vec<u8>,
        detector_scores: Vec<f64>,
        threshold: f64,
    ) -> Result<Self> {
        let n = data.n_samples();
        if detector_labels.len() != n || detector_scores.len() != n {
            return Err(ProteusError::InvalidData(
                "detector labels/scores length mismatch".into(),
            ));
        }
        for i in 0..n {
            let expect = u8::from(detector_scores[i] > threshold);
            if detector_labels[i] != expect {
                return Err(ProteusError::InvalidData(format!(
                    "label {} at row {i} inconsistent with score {} vs threshold {}",
                    detector_labels[i], detector_scores[i], threshold
                )));
            }
        }
        if !detector_labels.contains(&1) {
            return Err(ProteusError::InvalidData(
                "detector flagged no anomalies".into(),
            ));
        }
        Ok(LabeledDataset {
            data,
            detector_labels,
            detector_scores,
            threshold,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.data.n_samples()
    }

    pub fn anomaly_indices(&self) -> Vec<usize> {
        self.detector_labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 1)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Load a dataset from a CSV file: UTF-8, header row, comma separator,
/// plain decimal numbers. A named label column (values "0"/"1") becomes
/// `gold_labels`; a named group column (non-negative integers) becomes
/// `group_ids`; both are excluded from the feature matrix.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: Option<&str>,
    group_column: Option<&str>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| ProteusError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| ProteusError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    for (j, h) in headers.iter().enumerate() {
        if headers[..j].contains(h) {
            return Err(ProteusError::InvalidData(format!(
                "duplicate header name \"{h}\""
            )));
        }
    }

    let label_idx = match label_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            ProteusError::InvalidData(format!("label column \"{name}\" not found"))
        })?),
        None => None,
    };
    let group_idx = match group_column {
        Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
            ProteusError::InvalidData(format!("group column \"{name}\" not found"))
        })?),
        None => None,
    };

    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|j| Some(*j) != label_idx && Some(*j) != group_idx)
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&j| headers[j].clone()).collect();

    let mut flat: Vec<f64> = Vec::new();
    let mut gold: Vec<u8> = Vec::new();
    let mut groups: Vec<usize> = Vec::new();
    let mut n = 0usize;

    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ProteusError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(ProteusError::InvalidData(format!(
                "row {} has {} fields, header has {}",
                row_idx + 1,
                record.len(),
                headers.len()
            )));
        }
        for &j in &feature_cols {
            let cell = record[j].trim();
            let v: f64 = cell.parse().map_err(|_| ProteusError::NonNumericCell {
                row: row_idx + 1,
                column: headers[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(ProteusError::NonNumericCell {
                    row: row_idx + 1,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                });
            }
            flat.push(v);
        }
        if let Some(li) = label_idx {
            match record[li].trim() {
                "0" => gold.push(0),
                "1" => gold.push(1),
                other => {
                    return Err(ProteusError::InvalidData(format!(
                        "row {}, column \"{}\": label must be \"0\" or \"1\", got \"{}\"",
                        row_idx + 1,
                        headers[li],
                        other
                    )))
                }
            }
        }
        if let Some(gi) = group_idx {
            let cell = record[gi].trim();
            let g: usize = cell.parse().map_err(|_| ProteusError::NonNumericCell {
                row: row_idx + 1,
                column: headers[gi].clone(),
                value: cell.to_string(),
            })?;
            groups.push(g);
        }
        n += 1;
    }

    let d = feature_cols.len();
    let values = Array2::from_shape_vec((n, d), flat)
        .map_err(|e| ProteusError::InvalidData(e.to_string()))?;
    Dataset::new(
        values,
        feature_names,
        label_idx.map(|_| gold),
        group_idx.map(|_| groups),
    )
}
