use std::path::Path;

use proteus::data::load_csv;
use proteus::model_io::load_model;

pub fn run(model_path: &Path, data_path: &Path, out: &Path) -> anyhow::Result<()> {
    let model = load_model(model_path)?;
    let data = load_csv(data_path, None, None)?;
    if data.n_features() != model.input_dimension() {
        anyhow::bail!(
            "model expects {} features, {} has {}",
            model.input_dimension(),
            data_path.display(),
            data.n_features()
        );
    }
    let scores = model.score_rows(&data.values().view())?;
    let labels: Vec<u8> = scores.iter().map(|&s| u8::from(s > 0.5)).collect();
    let path = out.join("predictions.csv");
    super::write_score_csv(&path, &scores, &labels)?;
    println!(
        "scored {} samples, {} predicted anomalous",
        scores.len(),
        labels.iter().filter(|&&l| l == 1).count()
    );
    println!("wrote {}", path.display());
    Ok(())
}
