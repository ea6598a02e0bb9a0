use ndarray::{Array2, ArrayView2};

use crate::data::Dataset;
use crate::error::{ProteusError, Result};

/// Per-column standardizer fitted on training data and reusable on
/// held-out data. Uses the population (1/n) standard deviation; constant
/// columns get a standard deviation of 1 so the transform stays total.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardScaler {
    means: Vec<f64>,
    std_devs: Vec<f64>,
}

impl StandardScaler {
    pub fn fit(data: &Dataset) -> Result<Self> {
        Self::fit_matrix(&data.values().view())
    }

    pub fn fit_matrix(values: &ArrayView2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 {
            return Err(ProteusError::InvalidData(
                "standardizer needs at least 2 samples".into(),
            ));
        }
        let mut means = vec![0.0; d];
        let mut std_devs = vec![0.0; d];
        for j in 0..d {
            let col = values.column(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            means[j] = mean;
            std_devs[j] = if sd > 0.0 { sd } else { 1.0 };
        }
        Ok(StandardScaler { means, std_devs })
    }

    pub fn from_parts(means: Vec<f64>, std_devs: Vec<f64>) -> Result<Self> {
        if means.len() != std_devs.len() {
            return Err(ProteusError::InvalidData(
                "scaler means/stds length mismatch".into(),
            ));
        }
        if std_devs.iter().any(|&s| !(s > 0.0)) {
            return Err(ProteusError::InvalidData(
                "scaler standard deviations must be positive".into(),
            ));
        }
        Ok(StandardScaler { means, std_devs })
    }

    /// Identity scaler of the given width.
    pub fn identity(d: usize) -> Self {
        StandardScaler {
            means: vec![0.0; d],
            std_devs: vec![1.0; d],
        }
    }

    pub fn dimension(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn std_devs(&self) -> &[f64] {
        &self.std_devs
    }

    pub fn transform_matrix(&self, values: &ArrayView2<f64>) -> Result<Array2<f64>> {
        if values.ncols() != self.dimension() {
            return Err(ProteusError::InvalidData(format!(
                "scaler fitted on {} columns, given {}",
                self.dimension(),
                values.ncols()
            )));
        }
        let mut out = values.to_owned();
        for j in 0..self.dimension() {
            let (m, s) = (self.means[j], self.std_devs[j]);
            out.column_mut(j).mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn transform_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let values = self.transform_matrix(&data.values().view())?;
        data.with_values(values)
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dimension() {
            return Err(ProteusError::InvalidData(format!(
                "scaler fitted on {} columns, given row of {}",
                self.dimension(),
                row.len()
            )));
        }
        Ok(row
            .iter()
            .zip(self.means.iter().zip(&self.std_devs))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    /// Compose two affine maps: applying the result equals applying
    /// `self` first and `then` second.
    pub fn compose(&self, then: &StandardScaler) -> Result<StandardScaler> {
        if self.dimension() != then.dimension() {
            return Err(ProteusError::InvalidData(
                "cannot compose scalers of different widths".into(),
            ));
        }
        let means = self
            .means
            .iter()
            .zip(&self.std_devs)
            .zip(&then.means)
            .map(|((m1, s1), m2)| m1 + s1 * m2)
            .collect();
        let std_devs = self
            .std_devs
            .iter()
            .zip(&then.std_devs)
            .map(|(s1, s2)| s1 * s2)
            .collect();
        StandardScaler::from_parts(means, std_devs)
    }
}
