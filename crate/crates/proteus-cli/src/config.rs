//! TOML run configuration. Every field has a default mirroring the
//! pipeline's standard protocol, so a minimal file only names the data.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use proteus::automl::{CvProtocol, ExplainSettings, GridSpec, GroupingMode, OversampleSettings};
use proteus::detect::{DetectorKind, IsolationForestParams, LodaParams, LofParams};
use proteus::experiment::DetectorSpec;

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub oversample: OversampleSection,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub gold_column: Option<String>,
    pub group_column: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub kind: String,
    pub anomaly_ratio: f64,
    pub n_trees: usize,
    pub subsample: usize,
    pub lof_k: usize,
    pub loda_projections: usize,
}

impl Default for DetectorSection {
    fn default() -> Self {
        DetectorSection {
            kind: "iforest".into(),
            anomaly_ratio: 0.01,
            n_trees: 100,
            subsample: 256,
            lof_k: 15,
            loda_projections: 100,
        }
    }
}

impl DetectorSection {
    pub fn kind(&self) -> anyhow::Result<DetectorKind> {
        Ok(DetectorKind::parse(&self.kind)?)
    }

    pub fn spec(&self, seed: u64) -> anyhow::Result<DetectorSpec> {
        Ok(match self.kind()? {
            DetectorKind::IsolationForest => DetectorSpec::IsolationForest(IsolationForestParams {
                n_trees: self.n_trees,
                subsample_size: self.subsample,
                seed,
            }),
            DetectorKind::Lof => DetectorSpec::Lof(LofParams {
                k_neighbors: self.lof_k,
            }),
            DetectorKind::Loda => DetectorSpec::Loda(LodaParams {
                n_projections: self.loda_projections,
                n_bins: None,
                seed,
            }),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OversampleSection {
    pub sigma: f64,
    pub max_attempts: usize,
}

impl Default for OversampleSection {
    fn default() -> Self {
        OversampleSection {
            sigma: 0.1,
            max_attempts: 50,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSection {
    pub folds: usize,
    pub repeats: usize,
    pub bootstraps: usize,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            folds: 10,
            repeats: 5,
            bootstraps: 500,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lasso_lambdas: Vec<f64>,
    pub fbed_alphas: Vec<f64>,
    pub fbed_k_runs: Vec<usize>,
    pub include_full: bool,
    pub knn_k: Vec<usize>,
    pub rf_trees: Vec<usize>,
    pub rf_min_leaf: Vec<usize>,
    pub svm_c: Vec<f64>,
    pub ps: Vec<usize>,
    pub feature_cap: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let spec = GridSpec::default();
        GridSection {
            lasso_lambdas: spec.lasso_lambdas,
            fbed_alphas: spec.fbed_alphas,
            fbed_k_runs: spec.fbed_k_runs,
            include_full: spec.include_full,
            knn_k: spec.knn_k,
            rf_trees: spec.rf_trees,
            rf_min_leaf: spec.rf_min_leaf,
            svm_c: spec.svm_c,
            ps: spec.ps_values,
            feature_cap: spec.feature_cap,
        }
    }
}

impl GridSection {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            lasso_lambdas: self.lasso_lambdas.clone(),
            fbed_alphas: self.fbed_alphas.clone(),
            fbed_k_runs: self.fbed_k_runs.clone(),
            include_full: self.include_full,
            knn_k: self.knn_k.clone(),
            rf_trees: self.rf_trees.clone(),
            rf_min_leaf: self.rf_min_leaf.clone(),
            svm_c: self.svm_c.clone(),
            ps_values: self.ps.clone(),
            feature_cap: self.feature_cap,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Total dimensionalities of the synthetic variants.
    pub dims: Vec<usize>,
    /// Seeded runs of the bias experiment.
    pub runs: usize,
    pub train_fraction: f64,
    /// Detectors cycled through by the bias experiment.
    pub detectors: Vec<String>,
    /// Dimensionalities cycled through by the bias experiment.
    pub bias_dims: Vec<usize>,
    /// "compact" (default) or "full" configuration grid for bias runs.
    pub bias_grid: String,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            dims: vec![20, 40, 60, 80, 100],
            runs: 20,
            train_fraction: 0.7,
            detectors: vec!["iforest".into(), "lof".into(), "loda".into()],
            bias_dims: vec![60, 100],
            bias_grid: "compact".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<RunConfig> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }

    pub fn explain_settings(&self, seed: u64) -> ExplainSettings {
        ExplainSettings {
            protocol: CvProtocol {
                folds: self.cv.folds,
                repeats: self.cv.repeats,
                seed,
            },
            oversample: OversampleSettings {
                sigma: self.oversample.sigma,
                max_attempts: self.oversample.max_attempts,
                seed,
            },
            grouping: GroupingMode::Grouped,
            bootstraps: self.cv.bootstraps,
            clamp_folds: true,
        }
    }

    pub fn data_path(&self) -> anyhow::Result<&Path> {
        self.data
            .path
            .as_deref()
            .ok_or_else(|| anyhow::anyhow!("config is missing [data] path"))
    }
}
