use std::path::Path;

use proteus::data::{load_csv, StandardScaler};
use proteus::metrics::auc;

use crate::config::RunConfig;

pub fn run(config: &RunConfig, seed: u64, out: &Path) -> anyhow::Result<()> {
    let data = load_csv(
        config.data_path()?,
        config.data.gold_column.as_deref(),
        config.data.group_column.as_deref(),
    )?;
    let scaler = StandardScaler::fit(&data)?;
    let z = scaler.transform_dataset(&data)?;
    let spec = config.detector.spec(seed)?;
    let mut detector = spec.fit(&z.values().view())?;
    let scores = detector.training_scores().to_vec();
    let (threshold, labels) = detector.binarize(&scores, config.detector.anomaly_ratio)?;

    let path = out.join("detect.csv");
    super::write_score_csv(&path, &scores, &labels)?;

    let flagged = labels.iter().filter(|&&l| l == 1).count();
    println!(
        "detector {} on {} samples: {} flagged (threshold {:.6})",
        spec.kind().as_str(),
        data.n_samples(),
        flagged,
        threshold
    );
    if let Some(gold) = data.gold_labels() {
        println!("training AUC vs gold: {:.4}", auc(&scores, gold)?);
    }
    println!("wrote {}", path.display());
    Ok(())
}
