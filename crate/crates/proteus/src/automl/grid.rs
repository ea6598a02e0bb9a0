//! Configuration grid evaluation under the cross-validation protocol.
//!
//! For every (repeat, fold, pseudo-sample count) the engine standardizes
//! on the training rows, runs each selector once, fits every classifier
//! configuration on the selected columns, and scores the fold's original
//! test samples. Scores pool into one prediction matrix per repeat
//! (rows = original samples, columns = configurations); pseudo-samples
//! are training-only and never scored.

use std::collections::BTreeMap;

use ndarray::Array2;
use rayon::prelude::*;

use crate::classify::{project_columns, Classifier};
use crate::data::{LabeledDataset, StandardScaler};
use crate::detect::AnomalyJudge;
use crate::error::{ProteusError, Result};
use crate::metrics::auc;
use crate::oversample::{oversample, AugmentedDataset, OversampleParams};
use crate::seed::derive_seed;
use crate::select::run_selector;

use super::folds::{make_folds, CvProtocol, GroupingMode};
use super::Configuration;

/// Shared oversampling settings; the per-configuration `ps` completes
/// them.
#[derive(Debug, Clone, Copy)]
pub struct OversampleSettings {
    pub sigma: f64,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for OversampleSettings {
    fn default() -> Self {
        OversampleSettings {
            sigma: 0.1,
            max_attempts: 50,
            seed: 0,
        }
    }
}

impl OversampleSettings {
    pub fn params(&self, ps: usize) -> OversampleParams {
        OversampleParams {
            ps,
            sigma: self.sigma,
            max_attempts_per_pseudo: self.max_attempts,
            seed: self.seed,
        }
    }
}

/// Fold assignment over the augmented rows of one pseudo-sample count.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    pub repeat: usize,
    pub ps: usize,
    pub row_folds: Vec<usize>,
    pub n_original: usize,
}

/// Everything the grid run produced, kept introspectable so protocol
/// invariants can be asserted from the outside.
#[derive(Debug)]
pub struct GridEvaluation {
    /// One matrix per repeat: out-of-fold score of each original sample
    /// under each configuration.
    pub matrices: Vec<Array2<f64>>,
    /// Per configuration: mean over repeats of the pooled AUC.
    pub mean_cv_auc: Vec<f64>,
    /// Per configuration: mean selected-subset size over all folds.
    pub mean_selected_size: Vec<f64>,
    pub fold_plans: Vec<FoldPlan>,
    /// Augmented datasets by pseudo-sample count, reusable for the final
    /// refit.
    pub augmented: BTreeMap<usize, AugmentedDataset>,
}

pub fn evaluate_grid(
    base: &LabeledDataset,
    judge: &dyn AnomalyJudge,
    configs: &[Configuration],
    protocol: &CvProtocol,
    grouping: GroupingMode,
    settings: &OversampleSettings,
) -> Result<GridEvaluation> {
    if configs.is_empty() {
        return Err(ProteusError::InvalidParameter(
            "configuration grid is empty".into(),
        ));
    }
    protocol.validate()?;
    let n_original = base.n_samples();
    let n_cfg = configs.len();

    // one oversampling pass per distinct ps, shared by all configurations
    let mut ps_values: Vec<usize> = configs.iter().map(|c| c.ps).collect();
    ps_values.sort_unstable();
    ps_values.dedup();

    let mut augmented: BTreeMap<usize, AugmentedDataset> = BTreeMap::new();
    let mut combined: BTreeMap<usize, Array2<f64>> = BTreeMap::new();
    let mut labels_by_ps: BTreeMap<usize, Vec<u8>> = BTreeMap::new();
    let mut folds_by_ps: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut fold_plans = Vec::new();
    for &ps in &ps_values {
        let aug = oversample(base, judge, &settings.params(ps))?;
        let labels = aug.labels();
        let groups: Vec<usize> = match grouping {
            GroupingMode::Grouped => aug.group_ids.clone(),
            GroupingMode::Ungrouped => (0..aug.n_total()).collect(),
        };
        let folds = make_folds(&labels, &groups, protocol)?;
        for (repeat, row_folds) in folds.iter().enumerate() {
            fold_plans.push(FoldPlan {
                repeat,
                ps,
                row_folds: row_folds.clone(),
                n_original,
            });
        }
        combined.insert(ps, aug.combined_matrix());
        labels_by_ps.insert(ps, labels);
        folds_by_ps.insert(ps, folds);
        augmented.insert(ps, aug);
    }

    // the (repeat × fold × ps) task grid is embarrassingly parallel
    let mut tasks = Vec::new();
    for repeat in 0..protocol.repeats {
        for fold in 0..protocol.folds {
            for &ps in &ps_values {
                tasks.push((repeat, fold, ps));
            }
        }
    }

    struct TaskOutput {
        repeat: usize,
        test_rows: Vec<usize>,
        /// (config position, per-test-row scores)
        scores: Vec<(usize, Vec<f64>)>,
        /// (config position, selected size)
        sizes: Vec<(usize, usize)>,
    }

    let outputs: Vec<Result<TaskOutput>> = tasks
        .par_iter()
        .map(|&(repeat, fold, ps)| {
            let matrix = &combined[&ps];
            let labels = &labels_by_ps[&ps];
            let row_folds = &folds_by_ps[&ps][repeat];

            let train_rows: Vec<usize> = (0..matrix.nrows())
                .filter(|&i| row_folds[i] != fold)
                .collect();
            let test_rows: Vec<usize> = (0..n_original)
                .filter(|&i| row_folds[i] == fold)
                .collect();

            let mut x_train = Array2::zeros((train_rows.len(), matrix.ncols()));
            for (k, &r) in train_rows.iter().enumerate() {
                x_train.row_mut(k).assign(&matrix.row(r));
            }
            let y_train: Vec<u8> = train_rows.iter().map(|&r| labels[r]).collect();

            let scaler = StandardScaler::fit_matrix(&x_train.view())?;
            let x_train = scaler.transform_matrix(&x_train.view())?;
            let mut x_test = Array2::zeros((test_rows.len(), matrix.ncols()));
            for (k, &r) in test_rows.iter().enumerate() {
                x_test.row_mut(k).assign(&matrix.row(r));
            }
            let x_test = scaler.transform_matrix(&x_test.view())?;

            // each selector setting runs once per task and is shared by
            // every classifier configuration that uses it
            let mut selections = Vec::new();
            let mut scores = Vec::new();
            let mut sizes = Vec::new();
            for (pos, cfg) in configs.iter().enumerate() {
                if cfg.ps != ps {
                    continue;
                }
                let sel_idx = match selections.iter().position(|(s, _)| *s == cfg.selector) {
                    Some(i) => i,
                    None => {
                        let sel =
                            run_selector(&cfg.selector, &x_train.view(), &y_train, cfg.cap)?;
                        selections.push((cfg.selector.clone(), sel));
                        selections.len() - 1
                    }
                };
                let selection = &selections[sel_idx].1;
                sizes.push((pos, selection.selected.len()));

                if selection.is_empty() {
                    // a selector that returns nothing yields an
                    // uninformative constant score
                    scores.push((pos, vec![0.5; test_rows.len()]));
                    continue;
                }
                let xtr = project_columns(&x_train.view(), &selection.selected);
                let seed = derive_seed(
                    protocol.seed,
                    &[6, repeat as u64, fold as u64, cfg.id as u64],
                );
                let classifier = Classifier::fit(&cfg.classifier, &xtr.view(), &y_train, seed)?;
                let xte = project_columns(&x_test.view(), &selection.selected);
                let row_scores: Vec<f64> = (0..xte.nrows())
                    .map(|i| classifier.score(&xte.row(i).to_vec()))
                    .collect();
                scores.push((pos, row_scores));
            }

            Ok(TaskOutput {
                repeat,
                test_rows,
                scores,
                sizes,
            })
        })
        .collect();

    let mut matrices = vec![Array2::from_elem((n_original, n_cfg), f64::NAN); protocol.repeats];
    let mut size_sum = vec![0.0; n_cfg];
    let mut size_count = vec![0usize; n_cfg];
    for output in outputs {
        let output = output?;
        for (cfg_pos, row_scores) in &output.scores {
            for (k, &row) in output.test_rows.iter().enumerate() {
                matrices[output.repeat][[row, *cfg_pos]] = row_scores[k];
            }
        }
        for &(cfg_pos, size) in &output.sizes {
            size_sum[cfg_pos] += size as f64;
            size_count[cfg_pos] += 1;
        }
    }

    for (r, matrix) in matrices.iter().enumerate() {
        if matrix.iter().any(|v| v.is_nan()) {
            return Err(ProteusError::InvalidData(format!(
                "prediction matrix of repeat {r} has unscored cells"
            )));
        }
    }

    let mut mean_cv_auc = Vec::with_capacity(n_cfg);
    for cfg_pos in 0..n_cfg {
        let mut total = 0.0;
        for matrix in &matrices {
            let col: Vec<f64> = matrix.column(cfg_pos).to_vec();
            total += auc(&col, &base.detector_labels)?;
        }
        mean_cv_auc.push(total / protocol.repeats as f64);
    }

    let mean_selected_size = size_sum
        .iter()
        .zip(&size_count)
        .map(|(s, c)| if *c == 0 { 0.0 } else { s / *c as f64 })
        .collect();

    Ok(GridEvaluation {
        matrices,
        mean_cv_auc,
        mean_selected_size,
        fold_plans,
        augmented,
    })
}
