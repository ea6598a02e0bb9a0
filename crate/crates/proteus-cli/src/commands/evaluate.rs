use std::path::Path;

use proteus::data::load_csv;
use proteus::metrics::{auc, conflicts, discovery_rates};
use proteus::model_io::load_model;

pub fn run(
    model_path: &Path,
    data_path: &Path,
    detector_label_column: &str,
    gold_column: Option<&str>,
    out: &Path,
) -> anyhow::Result<()> {
    let model = load_model(model_path)?;
    // the loader extracts the detector labels via its label slot and the
    // optional gold column via its integer-column slot
    let data = load_csv(data_path, Some(detector_label_column), gold_column)?;
    let detector_labels = data
        .gold_labels()
        .expect("label column requested")
        .to_vec();
    let gold: Option<Vec<u8>> = match data.group_ids() {
        None => None,
        Some(ids) => {
            let mut gold = Vec::with_capacity(ids.len());
            for &v in ids {
                if v > 1 {
                    anyhow::bail!("gold column must be 0/1, found {v}");
                }
                gold.push(v as u8);
            }
            Some(gold)
        }
    };

    if data.n_features() != model.input_dimension() {
        anyhow::bail!(
            "model expects {} features, {} has {}",
            model.input_dimension(),
            data_path.display(),
            data.n_features()
        );
    }

    let scores = model.score_rows(&data.values().view())?;
    let predicted: Vec<u8> = scores.iter().map(|&s| u8::from(s > 0.5)).collect();
    let test_auc = auc(&scores, &detector_labels)?;
    let conflict_sets = conflicts(&detector_labels, &predicted)?;

    let rates = gold
        .as_ref()
        .map(|g| discovery_rates(&conflict_sets, g));
    let fmt_rate = |r: Option<f64>| match r {
        Some(v) => format!("{v:.6}"),
        None => "undefined".to_string(),
    };

    let metrics_path = out.join("metrics.csv");
    let mut w = csv::Writer::from_path(&metrics_path)?;
    w.write_record([
        "samples",
        "detector_positives",
        "test_auc",
        "anc_count",
        "nac_count",
        "tnd",
        "tad",
    ])?;
    let (tnd, tad) = match &rates {
        Some(r) => (fmt_rate(r.tnd), fmt_rate(r.tad)),
        None => ("no-gold".to_string(), "no-gold".to_string()),
    };
    w.write_record([
        data.n_samples().to_string(),
        detector_labels.iter().filter(|&&l| l == 1).count().to_string(),
        format!("{test_auc:.6}"),
        conflict_sets.anc.len().to_string(),
        conflict_sets.nac.len().to_string(),
        tnd,
        tad,
    ])?;
    w.flush()?;

    let conflicts_path = out.join("conflicts.csv");
    let mut w = csv::Writer::from_path(&conflicts_path)?;
    w.write_record(["row", "kind"])?;
    for &i in &conflict_sets.anc {
        w.write_record([i.to_string(), "ANC".to_string()])?;
    }
    for &i in &conflict_sets.nac {
        w.write_record([i.to_string(), "NAC".to_string()])?;
    }
    w.flush()?;

    println!("test AUC vs detector labels: {test_auc:.4}");
    println!(
        "conflicts: {} ANC, {} NAC",
        conflict_sets.anc.len(),
        conflict_sets.nac.len()
    );
    if let Some(r) = rates {
        println!("TND {}  TAD {}", fmt_rate(r.tnd), fmt_rate(r.tad));
    }
    println!("wrote {}", metrics_path.display());
    println!("wrote {}", conflicts_path.display());
    Ok(())
}
