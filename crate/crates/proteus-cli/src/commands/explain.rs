use std::io::Write as _;
use std::path::Path;

use proteus::automl::ExplanationReport;
use proteus::data::load_csv;
use proteus::experiment::run_pipeline;
use proteus::model_io::save_model;

use crate::config::RunConfig;

pub fn write_report_txt(
    report: &ExplanationReport,
    header: &[(String, String)],
    path: &Path,
) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path)?;
    for (k, v) in header {
        writeln!(f, "{k} {v}")?;
    }
    writeln!(f, "grid_configurations {}", report.per_config.len())?;
    writeln!(f, "folds_used {}", report.folds_used)?;
    writeln!(f, "best_config {}", report.best_config.describe())?;
    writeln!(f, "cv_auc_uncorrected {:.6}", report.cv_auc_uncorrected)?;
    writeln!(f, "bbc_auc {:.6}", report.bbc_auc)?;
    writeln!(
        f,
        "oversample_fill_rate {:.4} ({} of {} pseudo-samples accepted)",
        report.fill.fill_rate(),
        report.fill.accepted_total,
        report.fill.requested_total
    )?;
    for (row, accepted) in &report.fill.underfilled {
        writeln!(f, "underfilled_anomaly row={row} accepted={accepted}")?;
    }
    writeln!(f, "selected_count {}", report.selected_features.len())?;
    for ((idx, name), score) in report
        .selected_features
        .iter()
        .zip(&report.selected_names)
        .zip(&report.selection_scores)
    {
        writeln!(f, "feature {idx} {name} {score}")?;
    }
    Ok(())
}

pub fn write_config_table(report: &ExplanationReport, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "selector", "classifier", "ps", "mean_cv_auc", "mean_selected_size"])?;
    for row in &report.per_config {
        w.write_record([
            row.id.to_string(),
            row.selector.clone(),
            row.classifier.clone(),
            row.ps.to_string(),
            format!("{:.6}", row.mean_cv_auc),
            format!("{:.2}", row.mean_selected_size),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(config: &RunConfig, seed: u64, out: &Path) -> anyhow::Result<()> {
    let data_path = config.data_path()?;
    let data = load_csv(
        data_path,
        config.data.gold_column.as_deref(),
        config.data.group_column.as_deref(),
    )?;
    let spec = config.detector.spec(seed)?;
    let configs = config.grid.grid_spec().configurations();
    let settings = config.explain_settings(seed);

    let outcome = run_pipeline(
        &data,
        &spec,
        config.detector.anomaly_ratio,
        &configs,
        &settings,
    )?;

    let header = vec![
        ("dataset".to_string(), data_path.display().to_string()),
        ("samples".to_string(), data.n_samples().to_string()),
        ("features".to_string(), data.n_features().to_string()),
        ("detector".to_string(), spec.kind().as_str().to_string()),
        (
            "anomaly_ratio".to_string(),
            config.detector.anomaly_ratio.to_string(),
        ),
        (
            "threshold".to_string(),
            format!("{:.6}", outcome.threshold),
        ),
        (
            "flagged".to_string(),
            outcome
                .detector_labels
                .iter()
                .filter(|&&l| l == 1)
                .count()
                .to_string(),
        ),
    ];

    let report_path = out.join("report.txt");
    write_report_txt(&outcome.report, &header, &report_path)?;
    let table_path = out.join("configs.csv");
    write_config_table(&outcome.report, &table_path)?;
    let model_path = out.join("model.txt");
    save_model(&outcome.deliverable, &model_path)?;
    let detect_path = out.join("detect.csv");
    super::write_score_csv(&detect_path, &outcome.detector_scores, &outcome.detector_labels)?;

    println!(
        "best {}  cv {:.4}  bbc {:.4}  |S| {}  ({:.1}s)",
        outcome.report.best_config.describe(),
        outcome.report.cv_auc_uncorrected,
        outcome.report.bbc_auc,
        outcome.report.selected_features.len(),
        outcome.report.elapsed_seconds,
    );
    if let Some(gold_auc) = outcome.detector_auc_vs_gold {
        println!("detector AUC vs gold: {gold_auc:.4}");
    }
    for p in [&report_path, &table_path, &model_path, &detect_path] {
        println!("wrote {}", p.display());
    }
    Ok(())
}
