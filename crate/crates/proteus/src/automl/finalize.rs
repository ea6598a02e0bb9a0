//! Final refit: train the winning configuration on all available samples
//! (the full augmented dataset) to produce the deliverable surrogate and
//! its feature subset.

use crate::classify::{project_columns, Classifier, SurrogateModel};
use crate::data::{LabeledDataset, StandardScaler};
use crate::detect::AnomalyJudge;
use crate::error::{ProteusError, Result};
use crate::oversample::{oversample, AugmentedDataset, FillRateSummary};
use crate::seed::derive_seed;
use crate::select::{run_selector, SelectionResult};

use super::grid::OversampleSettings;
use super::Configuration;

#[derive(Debug)]
pub struct FinalModel {
    pub surrogate: SurrogateModel,
    pub selection: SelectionResult,
    pub fill: FillRateSummary,
}

/// Refit the best configuration on the full dataset. `cached` lets the
/// caller reuse the augmented dataset the grid evaluation already built
/// for the winning pseudo-sample count.
pub fn finalize(
    base: &LabeledDataset,
    judge: &dyn AnomalyJudge,
    config: &Configuration,
    settings: &OversampleSettings,
    cached: Option<&AugmentedDataset>,
    seed: u64,
) -> Result<FinalModel> {
    let owned;
    let aug = match cached {
        Some(a) => a,
        None => {
            owned = oversample(base, judge, &settings.params(config.ps))?;
            &owned
        }
    };

    let combined = aug.combined_matrix();
    let labels = aug.labels();
    let scaler = StandardScaler::fit_matrix(&combined.view())?;
    let x = scaler.transform_matrix(&combined.view())?;

    let selection = run_selector(&config.selector, &x.view(), &labels, config.cap)?;
    if selection.is_empty() {
        return Err(ProteusError::InvalidData(
            "winning configuration selected no features on the full dataset".into(),
        ));
    }

    let projected = project_columns(&x.view(), &selection.selected);
    let classifier = Classifier::fit(
        &config.classifier,
        &projected.view(),
        &labels,
        derive_seed(seed, &[8, config.id as u64]),
    )?;

    let feature_names = selection
        .selected
        .iter()
        .map(|&j| base.data.feature_names()[j].clone())
        .collect();

    Ok(FinalModel {
        surrogate: SurrogateModel {
            config: config.classifier.clone(),
            selected_features: selection.selected.clone(),
            feature_names,
            scaler,
            classifier,
        },
        selection,
        fill: aug.fill.clone(),
    })
}
