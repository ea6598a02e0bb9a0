//! End-to-end experiment drivers shared by the CLI and the acceptance
//! suite: the plain explain pipeline for a CSV dataset, the synthetic
//! benchmark protocol (70/30 split, detector fitted on the parent
//! features before dilution), and the estimation-bias comparison across
//! protocol variants.

use ndarray::{s, Array2};

use crate::automl::{
    bbc_correct, evaluate_grid, explain, finalize, select_winner, Configuration,
    ExplainSettings, ExplanationReport, GroupingMode,
};
use crate::classify::SurrogateModel;
use crate::data::{
    generate_synthetic, make_hics_like_parent, stratified_split, Dataset, LabeledDataset,
    StandardScaler,
};
use crate::detect::{
    ColumnSubsetJudge, DetectorKind, DetectorModel, IsolationForestParams, LodaParams, LofParams,
};
use crate::error::{ProteusError, Result};
use crate::metrics::{auc, conflicts, discovery_rates, feature_pr, BiasRecord, BiasVariant,
    ConflictSets, DiscoveryRates};
use crate::seed::derive_seed;

/// Which detector to fit, with its hyper-parameters.
#[derive(Debug, Clone)]
pub enum DetectorSpec {
    IsolationForest(IsolationForestParams),
    Lof(LofParams),
    Loda(LodaParams),
}

impl DetectorSpec {
    pub fn with_defaults(kind: DetectorKind, seed: u64) -> DetectorSpec {
        match kind {
            DetectorKind::IsolationForest => DetectorSpec::IsolationForest(IsolationForestParams {
                seed,
                ..Default::default()
            }),
            DetectorKind::Lof => DetectorSpec::Lof(LofParams::default()),
            DetectorKind::Loda => DetectorSpec::Loda(LodaParams {
                seed,
                ..Default::default()
            }),
        }
    }

    pub fn kind(&self) -> DetectorKind {
        match self {
            DetectorSpec::IsolationForest(_) => DetectorKind::IsolationForest,
            DetectorSpec::Lof(_) => DetectorKind::Lof,
            DetectorSpec::Loda(_) => DetectorKind::Loda,
        }
    }

    pub fn fit(&self, data: &ndarray::ArrayView2<f64>) -> Result<DetectorModel> {
        match self {
            DetectorSpec::IsolationForest(p) => DetectorModel::fit_isolation_forest(data, p),
            DetectorSpec::Lof(p) => DetectorModel::fit_lof(data, p),
            DetectorSpec::Loda(p) => DetectorModel::fit_loda(data, p),
        }
    }
}

/// Output of the plain pipeline on one dataset.
#[derive(Debug)]
pub struct PipelineOutcome {
    pub report: ExplanationReport,
    /// Surrogate whose scaler consumes raw (unstandardized) rows.
    pub deliverable: SurrogateModel,
    pub threshold: f64,
    pub detector_scores: Vec<f64>,
    pub detector_labels: Vec<u8>,
    /// Detector's training AUC against gold labels, when present.
    pub detector_auc_vs_gold: Option<f64>,
}

/// Standardize, fit the detector, label the data, run the engine, and
/// compose the deliverable surrogate back into raw coordinates.
pub fn run_pipeline(
    data: &Dataset,
    spec: &DetectorSpec,
    anomaly_ratio: f64,
    configs: &[Configuration],
    settings: &ExplainSettings,
) -> Result<PipelineOutcome> {
    let scaler = StandardScaler::fit(data)?;
    let z = scaler.transform_dataset(data)?;
    let mut detector = spec.fit(&z.values().view())?;
    let scores = detector.training_scores().to_vec();
    let (threshold, labels) = detector.binarize(&scores, anomaly_ratio)?;
    let labeled = LabeledDataset::new(z, labels.clone(), scores.clone(), threshold)?;

    let detector_auc_vs_gold = match data.gold_labels() {
        Some(gold) => Some(auc(&scores, gold)?),
        None => None,
    };

    let report = explain(&labeled, &detector, configs, settings)?;
    let deliverable = SurrogateModel {
        scaler: scaler.compose(&report.surrogate.scaler)?,
        ..report.surrogate.clone()
    };

    Ok(PipelineOutcome {
        report,
        deliverable,
        threshold,
        detector_scores: scores,
        detector_labels: labels,
        detector_auc_vs_gold,
    })
}

/// A prepared synthetic run: detector fitted on the standardized parent
/// features of the training split, pipeline matrices carrying those
/// standardized parent columns plus the raw noise columns.
pub struct PreparedSynthetic {
    pub train: LabeledDataset,
    pub detector: DetectorModel,
    /// Columns of the pipeline space the detector sees (the parent ones).
    pub detector_columns: Vec<usize>,
    pub x_test: Array2<f64>,
    pub y_test: Vec<u8>,
    pub gold_train: Vec<u8>,
    pub gold_test: Vec<u8>,
    pub gold_features: Vec<usize>,
    pub detector_train_auc: f64,
    /// Maps raw diluted rows into the pipeline space.
    pub outer_scaler: StandardScaler,
    /// The raw diluted dataset and the split, for writing artifacts.
    pub full: Dataset,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

pub fn prepare_synthetic(
    dim: usize,
    detector_kind: DetectorKind,
    train_fraction: f64,
    seed: u64,
) -> Result<PreparedSynthetic> {
    if dim < crate::data::PARENT_FEATURES {
        return Err(ProteusError::InvalidParameter(format!(
            "dimension {dim} is below the parent feature count"
        )));
    }
    let bench = make_hics_like_parent(derive_seed(seed, &[10]));
    let full = generate_synthetic(
        &bench.dataset,
        dim - crate::data::PARENT_FEATURES,
        derive_seed(seed, &[10]),
    )?;
    let gold = full.gold_labels().expect("benchmark carries gold labels");
    let gold_ratio =
        gold.iter().filter(|&&g| g == 1).count() as f64 / gold.len() as f64;

    let (train_rows, test_rows) =
        stratified_split(gold, train_fraction, derive_seed(seed, &[11]))?;
    let n_parent = crate::data::PARENT_FEATURES;

    // the detector sees only the parent features, standardized on train
    let parent_train = full
        .values()
        .select(ndarray::Axis(0), &train_rows)
        .slice(s![.., ..n_parent])
        .to_owned();
    let parent_test = full
        .values()
        .select(ndarray::Axis(0), &test_rows)
        .slice(s![.., ..n_parent])
        .to_owned();
    let det_scaler = StandardScaler::fit_matrix(&parent_train.view())?;
    let z_parent_train = det_scaler.transform_matrix(&parent_train.view())?;
    let z_parent_test = det_scaler.transform_matrix(&parent_test.view())?;

    let spec = DetectorSpec::with_defaults(detector_kind, derive_seed(seed, &[12]));
    let mut detector = spec.fit(&z_parent_train.view())?;
    let train_scores = detector.training_scores().to_vec();
    let (threshold, y_train) = detector.binarize(&train_scores, gold_ratio)?;
    let test_scores = detector.score_rows(&z_parent_test.view());
    let y_test: Vec<u8> = test_scores.iter().map(|&s| u8::from(s > threshold)).collect();

    let gold_train: Vec<u8> = train_rows.iter().map(|&i| gold[i]).collect();
    let gold_test: Vec<u8> = test_rows.iter().map(|&i| gold[i]).collect();
    let detector_train_auc = auc(&train_scores, &gold_train)?;

    // pipeline space: standardized parent columns, raw noise columns
    let build_pipeline_matrix = |rows: &[usize], z_parent: &Array2<f64>| {
        let mut m = Array2::zeros((rows.len(), dim));
        m.slice_mut(s![.., ..n_parent]).assign(z_parent);
        for (k, &r) in rows.iter().enumerate() {
            for j in n_parent..dim {
                m[[k, j]] = full.values()[[r, j]];
            }
        }
        m
    };
    let x_train = build_pipeline_matrix(&train_rows, &z_parent_train);
    let x_test = build_pipeline_matrix(&test_rows, &z_parent_test);

    let train_data = Dataset::new(
        x_train,
        full.feature_names().to_vec(),
        Some(gold_train.clone()),
        None,
    )?;
    let train = LabeledDataset::new(train_data, y_train, train_scores, threshold)?;

    let mut outer_means = det_scaler.means().to_vec();
    let mut outer_stds = det_scaler.std_devs().to_vec();
    outer_means.resize(dim, 0.0);
    outer_stds.resize(dim, 1.0);
    let outer_scaler = StandardScaler::from_parts(outer_means, outer_stds)?;

    Ok(PreparedSynthetic {
        train,
        detector,
        detector_columns: (0..n_parent).collect(),
        x_test,
        y_test,
        gold_train,
        gold_test,
        gold_features: bench.gold_subspace(),
        detector_train_auc,
        outer_scaler,
        full,
        train_rows,
        test_rows,
    })
}

#[derive(Debug)]
pub struct SyntheticOutcome {
    pub report: ExplanationReport,
    pub gold_features: Vec<usize>,
    pub precision: f64,
    pub recall: f64,
    /// Held-out AUC of the final surrogate against detector labels.
    pub test_auc: f64,
    pub detector_train_auc: f64,
    /// Surrogate in raw diluted coordinates.
    pub deliverable: SurrogateModel,
    pub test_conflicts: ConflictSets,
    pub test_discovery: DiscoveryRates,
    pub n_test_positives: usize,
}

/// Full synthetic protocol: split, detect on the parent features, dilute,
/// explain, and evaluate generalization on the held-out samples.
pub fn run_synthetic_experiment(
    dim: usize,
    detector_kind: DetectorKind,
    configs: &[Configuration],
    settings: &ExplainSettings,
    seed: u64,
) -> Result<SyntheticOutcome> {
    let prepared = prepare_synthetic(dim, detector_kind, 0.7, seed)?;
    run_prepared_experiment(prepared, configs, settings, seed)
}

fn run_prepared_experiment(
    prepared: PreparedSynthetic,
    configs: &[Configuration],
    settings: &ExplainSettings,
    seed: u64,
) -> Result<SyntheticOutcome> {
    let judge = ColumnSubsetJudge::new(&prepared.detector, prepared.detector_columns.clone())?;

    let mut settings = settings.clone();
    settings.protocol.seed = derive_seed(seed, &[13]);
    settings.oversample.seed = derive_seed(seed, &[14]);

    let report = explain(&prepared.train, &judge, configs, &settings)?;

    let pr = feature_pr(&prepared.gold_features, &report.selected_features)?;
    let test_scores = report.surrogate.score_rows(&prepared.x_test.view())?;
    let test_auc = auc(&test_scores, &prepared.y_test)?;

    let predicted: Vec<u8> = test_scores.iter().map(|&s| u8::from(s > 0.5)).collect();
    let test_conflicts = conflicts(&prepared.y_test, &predicted)?;
    let test_discovery = discovery_rates(&test_conflicts, &prepared.gold_test);

    let deliverable = SurrogateModel {
        scaler: prepared.outer_scaler.compose(&report.surrogate.scaler)?,
        ..report.surrogate.clone()
    };

    Ok(SyntheticOutcome {
        gold_features: prepared.gold_features,
        precision: pr.precision,
        recall: pr.recall,
        test_auc,
        detector_train_auc: prepared.detector_train_auc,
        deliverable,
        test_conflicts,
        test_discovery,
        n_test_positives: prepared.y_test.iter().filter(|&&l| l == 1).count(),
        report,
    })
}

/// One bias run: evaluate the same data under grouped and ungrouped
/// folding, reporting both the raw CV estimate and the corrected one
/// against the held-out test AUC of each variant's winner.
pub fn run_bias_variants(
    dim: usize,
    detector_kind: DetectorKind,
    train_fraction: f64,
    configs: &[Configuration],
    settings: &ExplainSettings,
    seed: u64,
) -> Result<Vec<BiasRecord>> {
    let prepared = prepare_synthetic(dim, detector_kind, train_fraction, seed)?;
    let judge = ColumnSubsetJudge::new(&prepared.detector, prepared.detector_columns.clone())?;

    let n_anomalies = prepared.train.anomaly_indices().len();
    let n_normals = prepared.train.n_samples() - n_anomalies;
    let mut protocol = settings.protocol;
    protocol.seed = derive_seed(seed, &[13]);
    protocol.folds = protocol.folds.min(n_anomalies).min(n_normals);
    if protocol.folds < 2 {
        return Err(ProteusError::InvalidData(
            "too few detector anomalies for the bias experiment".into(),
        ));
    }
    let mut oversample = settings.oversample;
    oversample.seed = derive_seed(seed, &[14]);

    let mut records = Vec::new();
    for (mode, bbc_variant, cv_variant) in [
        (
            GroupingMode::Grouped,
            BiasVariant::BbcGrouped,
            BiasVariant::CvGrouped,
        ),
        (
            GroupingMode::Ungrouped,
            BiasVariant::BbcUngrouped,
            BiasVariant::CvUngrouped,
        ),
    ] {
        let evaluation = evaluate_grid(
            &prepared.train,
            &judge,
            configs,
            &protocol,
            mode,
            &oversample,
        )?;
        let winner = select_winner(&evaluation.mean_cv_auc, &evaluation.mean_selected_size);
        let groups: Vec<usize> = (0..prepared.train.n_samples()).collect();
        let bbc_estimate = bbc_correct(
            &evaluation.matrices,
            &prepared.train.detector_labels,
            &groups,
            &evaluation.mean_selected_size,
            settings.bootstraps,
            protocol.seed,
        )?;
        let final_model = finalize(
            &prepared.train,
            &judge,
            &configs[winner],
            &oversample,
            evaluation.augmented.get(&configs[winner].ps),
            protocol.seed,
        )?;
        let test_scores = final_model.surrogate.score_rows(&prepared.x_test.view())?;
        let test_auc = auc(&test_scores, &prepared.y_test)?;

        records.push(BiasRecord {
            train_estimate: bbc_estimate,
            test_auc,
            variant: bbc_variant,
        });
        records.push(BiasRecord {
            train_estimate: evaluation.mean_cv_auc[winner],
            test_auc,
            variant: cv_variant,
        });
    }
    Ok(records)
}

/// Compact grid for the bias sweeps: enough configurations for the
/// winner's curse to bite without the full grid's cost.
pub fn bias_grid() -> Vec<Configuration> {
    use crate::automl::GridSpec;
    GridSpec {
        lasso_lambdas: vec![0.005, 0.05],
        fbed_alphas: vec![0.05],
        fbed_k_runs: vec![0],
        include_full: true,
        knn_k: vec![3, 11],
        rf_trees: vec![],
        rf_min_leaf: vec![],
        svm_c: vec![1.0],
        ps_values: vec![0, 3],
        feature_cap: 10,
    }
    .configurations()
}
