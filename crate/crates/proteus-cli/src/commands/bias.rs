use std::io::Write as _;
use std::path::Path;

use proteus::detect::DetectorKind;
use proteus::experiment::{bias_grid, run_bias_variants};
use proteus::metrics::{bias_summary, BiasRecord, BiasVariant};
use proteus::derive_seed;

use crate::config::RunConfig;

pub fn write_records_csv(records: &[(usize, BiasRecord)], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "variant", "train_estimate", "test_auc"])?;
    for (run, r) in records {
        w.write_record([
            run.to_string(),
            r.variant.as_str().to_string(),
            format!("{:.6}", r.train_estimate),
            format!("{:.6}", r.test_auc),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(config: &RunConfig, seed: u64, out: &Path) -> anyhow::Result<()> {
    let exp = &config.experiment;
    if exp.runs == 0 {
        anyhow::bail!("experiment.runs must be >= 1");
    }
    if exp.detectors.is_empty() || exp.bias_dims.is_empty() {
        anyhow::bail!("experiment.detectors and experiment.bias_dims must be non-empty");
    }
    let detectors: Vec<DetectorKind> = exp
        .detectors
        .iter()
        .map(|s| DetectorKind::parse(s))
        .collect::<Result<_, _>>()?;
    let grid = match exp.bias_grid.as_str() {
        "compact" => bias_grid(),
        "full" => config.grid.grid_spec().configurations(),
        other => anyhow::bail!("experiment.bias_grid must be \"compact\" or \"full\", got {other}"),
    };

    let mut settings = config.explain_settings(seed);
    settings.protocol.folds = settings.protocol.folds.min(5);
    settings.protocol.repeats = settings.protocol.repeats.min(2);
    settings.bootstraps = settings.bootstraps.min(200);

    let mut all = Vec::new();
    for run_idx in 0..exp.runs {
        let dim = exp.bias_dims[run_idx % exp.bias_dims.len()];
        let detector = detectors[(run_idx / exp.bias_dims.len()) % detectors.len()];
        let run_seed = derive_seed(seed, &[20, run_idx as u64]);
        let records =
            run_bias_variants(dim, detector, exp.train_fraction, &grid, &settings, run_seed)?;
        println!(
            "run {run_idx:2} dim {dim:3} {}: {}",
            detector.as_str(),
            records
                .iter()
                .map(|r| format!("{}={:.3}/{:.3}", r.variant.as_str(), r.train_estimate, r.test_auc))
                .collect::<Vec<_>>()
                .join("  ")
        );
        for r in records {
            all.push((run_idx, r));
        }
    }

    let records_path = out.join("bias_records.csv");
    write_records_csv(&all, &records_path)?;

    let flat: Vec<BiasRecord> = all.iter().map(|(_, r)| *r).collect();
    let summaries = bias_summary(&flat);
    let summary_path = out.join("rss_summary.txt");
    let mut f = std::fs::File::create(&summary_path)?;
    for s in &summaries {
        writeln!(
            f,
            "{} rss {:.6} mean_signed_bias {:+.6} runs {}",
            s.variant.as_str(),
            s.rss,
            s.mean_signed_bias,
            s.count
        )?;
        println!(
            "{:12} rss {:.4}  mean bias {:+.4}",
            s.variant.as_str(),
            s.rss,
            s.mean_signed_bias
        );
    }
    let get = |v: BiasVariant| summaries.iter().find(|s| s.variant == v);
    if let (Some(bbc_g), Some(cv_g), Some(cv_ng)) = (
        get(BiasVariant::BbcGrouped),
        get(BiasVariant::CvGrouped),
        get(BiasVariant::CvUngrouped),
    ) {
        writeln!(
            f,
            "ordering_bbc_grouped_best {}",
            bbc_g.rss < cv_g.rss && bbc_g.rss < cv_ng.rss
        )?;
    }
    println!("wrote {}", records_path.display());
    println!("wrote {}", summary_path.display());
    Ok(())
}
