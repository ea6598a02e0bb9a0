//! The AutoML engine: grid search over (selector, classifier,
//! oversampling) configurations under stratified, repeated, group-aware
//! cross-validation, bootstrap-bias-corrected reporting, and the final
//! full-data refit.

mod bbc;
mod finalize;
mod folds;
mod grid;

pub use bbc::bbc_correct;
pub use finalize::{finalize, FinalModel};
pub use folds::{make_folds, CvProtocol, GroupingMode};
pub use grid::{evaluate_grid, FoldPlan, GridEvaluation, OversampleSettings};

use crate::classify::{ClassifierConfig, SurrogateModel};
use crate::data::LabeledDataset;
use crate::detect::AnomalyJudge;
use crate::error::{ProteusError, Result};
use crate::oversample::FillRateSummary;
use crate::select::SelectorConfig;

/// One point of the configuration grid: a feature selector, a
/// classifier, their hyper-parameters, and the pseudo-sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub id: usize,
    pub selector: SelectorConfig,
    pub classifier: ClassifierConfig,
    pub ps: usize,
    /// Selection size cap (the full selector ignores it).
    pub cap: usize,
}

impl Configuration {
    pub fn describe(&self) -> String {
        format!(
            "{} + {} + ps={}",
            self.selector.describe(),
            self.classifier.describe(),
            self.ps
        )
    }
}

/// Declared hyper-parameter grid. The default mirrors the stated
/// protocol values: selection capped at 10 features, pseudo-sample
/// counts {0, 3, 10}, three classifier families.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub lasso_lambdas: Vec<f64>,
    pub fbed_alphas: Vec<f64>,
    pub fbed_k_runs: Vec<usize>,
    pub include_full: bool,
    pub knn_k: Vec<usize>,
    pub rf_trees: Vec<usize>,
    pub rf_min_leaf: Vec<usize>,
    pub svm_c: Vec<f64>,
    pub ps_values: Vec<usize>,
    pub feature_cap: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lasso_lambdas: vec![0.001, 0.005, 0.01, 0.05],
            fbed_alphas: vec![0.05, 0.1],
            fbed_k_runs: vec![0, 1],
            include_full: true,
            knn_k: vec![3, 5, 11],
            rf_trees: vec![100],
            rf_min_leaf: vec![1, 3],
            svm_c: vec![0.1, 1.0, 10.0],
            ps_values: vec![0, 3, 10],
            feature_cap: 10,
        }
    }
}

impl GridSpec {
    /// Materialize the Cartesian product, ids in enumeration order.
    pub fn configurations(&self) -> Vec<Configuration> {
        let mut selectors: Vec<SelectorConfig> = Vec::new();
        for &lambda in &self.lasso_lambdas {
            selectors.push(SelectorConfig::Lasso { lambda });
        }
        for &alpha in &self.fbed_alphas {
            for &k_runs in &self.fbed_k_runs {
                selectors.push(SelectorConfig::Fbed { alpha, k_runs });
            }
        }
        if self.include_full {
            selectors.push(SelectorConfig::Full);
        }

        let mut classifiers: Vec<ClassifierConfig> = Vec::new();
        for &c in &self.svm_c {
            classifiers.push(ClassifierConfig::LinearSvm { c });
        }
        for &n_trees in &self.rf_trees {
            for &min_leaf in &self.rf_min_leaf {
                classifiers.push(ClassifierConfig::RandomForest { n_trees, min_leaf });
            }
        }
        for &k in &self.knn_k {
            classifiers.push(ClassifierConfig::Knn { k });
        }

        let mut configs = Vec::new();
        let mut id = 0;
        for selector in &selectors {
            for classifier in &classifiers {
                for &ps in &self.ps_values {
                    configs.push(Configuration {
                        id,
                        selector: selector.clone(),
                        classifier: classifier.clone(),
                        ps,
                        cap: self.feature_cap,
                    });
                    id += 1;
                }
            }
        }
        configs
    }
}

/// Pick the winning configuration: highest mean CV AUC, ties broken by
/// smaller mean selection size, then by lower id.
pub fn select_winner(mean_cv_auc: &[f64], mean_selected_size: &[f64]) -> usize {
    let mut best = 0;
    for c in 1..mean_cv_auc.len() {
        let better = mean_cv_auc[c] > mean_cv_auc[best]
            || (mean_cv_auc[c] == mean_cv_auc[best]
                && mean_selected_size[c] < mean_selected_size[best]);
        if better {
            best = c;
        }
    }
    best
}

/// Per-configuration summary row for reports.
#[derive(Debug, Clone)]
pub struct ConfigSummary {
    pub id: usize,
    pub selector: String,
    pub classifier: String,
    pub ps: usize,
    pub mean_cv_auc: f64,
    pub mean_selected_size: f64,
}

/// The full output of one engine run.
#[derive(Debug)]
pub struct ExplanationReport {
    pub best_config: Configuration,
    pub selected_features: Vec<usize>,
    pub selected_names: Vec<String>,
    pub selection_scores: Vec<f64>,
    /// Bootstrap-bias-corrected out-of-sample AUC estimate.
    pub bbc_auc: f64,
    /// The winner's raw mean CV AUC (optimistic; reported for contrast).
    pub cv_auc_uncorrected: f64,
    pub per_config: Vec<ConfigSummary>,
    pub surrogate: SurrogateModel,
    pub fill: FillRateSummary,
    /// Folds actually used after clamping to the anomaly group count.
    pub folds_used: usize,
    pub elapsed_seconds: f64,
}

/// Engine settings beyond the grid itself.
#[derive(Debug, Clone)]
pub struct ExplainSettings {
    pub protocol: CvProtocol,
    pub oversample: OversampleSettings,
    pub grouping: GroupingMode,
    pub bootstraps: usize,
    /// Lower K to the anomaly group count instead of failing when the
    /// dataset has fewer flagged anomalies than folds.
    pub clamp_folds: bool,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings {
            protocol: CvProtocol::default(),
            oversample: OversampleSettings::default(),
            grouping: GroupingMode::Grouped,
            bootstraps: 500,
            clamp_folds: true,
        }
    }
}

/// Run the whole engine: evaluate the grid, select the winner, correct
/// the estimate, refit on everything.
pub fn explain(
    base: &LabeledDataset,
    judge: &dyn AnomalyJudge,
    configs: &[Configuration],
    settings: &ExplainSettings,
) -> Result<ExplanationReport> {
    let started = std::time::Instant::now();
    let n_anomalies = base.anomaly_indices().len();
    let n_normals = base.n_samples() - n_anomalies;

    let mut protocol = settings.protocol;
    if settings.clamp_folds {
        protocol.folds = protocol.folds.min(n_anomalies).min(n_normals);
    }
    if protocol.folds < 2 {
        return Err(ProteusError::InvalidData(format!(
            "cannot cross-validate: {n_anomalies} anomaly groups"
        )));
    }

    let evaluation = evaluate_grid(
        base,
        judge,
        configs,
        &protocol,
        settings.grouping,
        &settings.oversample,
    )?;

    let winner = select_winner(&evaluation.mean_cv_auc, &evaluation.mean_selected_size);
    let best_config = configs[winner].clone();

    // resampling units: original rows (pseudo-samples never enter the
    // prediction matrix, so groups degenerate to rows)
    let groups: Vec<usize> = (0..base.n_samples()).collect();
    let bbc_auc = bbc_correct(
        &evaluation.matrices,
        &base.detector_labels,
        &groups,
        &evaluation.mean_selected_size,
        settings.bootstraps,
        protocol.seed,
    )?;

    let final_model = finalize(
        base,
        judge,
        &best_config,
        &settings.oversample,
        evaluation.augmented.get(&best_config.ps),
        protocol.seed,
    )?;

    let per_config = configs
        .iter()
        .enumerate()
        .map(|(pos, cfg)| ConfigSummary {
            id: cfg.id,
            selector: cfg.selector.describe(),
            classifier: cfg.classifier.describe(),
            ps: cfg.ps,
            mean_cv_auc: evaluation.mean_cv_auc[pos],
            mean_selected_size: evaluation.mean_selected_size[pos],
        })
        .collect();

    Ok(ExplanationReport {
        selected_features: final_model.selection.selected.clone(),
        selected_names: final_model.surrogate.feature_names.clone(),
        selection_scores: final_model.selection.scores.clone(),
        bbc_auc,
        cv_auc_uncorrected: evaluation.mean_cv_auc[winner],
        per_config,
        surrogate: final_model.surrogate,
        fill: final_model.fill,
        best_config,
        folds_used: protocol.folds,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_216_configurations() {
        let configs = GridSpec::default().configurations();
        assert_eq!(configs.len(), 216); // 9 selectors × 8 classifiers × 3 ps
        // ids are the enumeration order
        for (pos, cfg) in configs.iter().enumerate() {
            assert_eq!(cfg.id, pos);
        }
    }

    #[test]
    fn winner_prefers_auc_then_size_then_id() {
        let auc = [0.9, 0.95, 0.95, 0.8];
        let size = [1.0, 5.0, 3.0, 1.0];
        assert_eq!(select_winner(&auc, &size), 2);

        let auc = [0.9, 0.9];
        let size = [4.0, 4.0];
        assert_eq!(select_winner(&auc, &size), 0);
    }
}
