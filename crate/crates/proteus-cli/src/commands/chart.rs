use std::path::Path;

use proteus::chart::{render_chart, QuantileMap, SaeChart};
use proteus::classify::project_columns;
use proteus::data::load_csv;
use proteus::model_io::load_model;

pub fn run(
    model_path: &Path,
    data_path: &Path,
    samples: &str,
    labels_csv: Option<&Path>,
    out: &Path,
) -> anyhow::Result<()> {
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
    let sample_ids: Vec<usize> = samples
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow::anyhow!("bad --samples list: {e}"))?;
    for &i in &sample_ids {
        if i >= data.n_samples() {
            anyhow::bail!("sample {i} out of range (n={})", data.n_samples());
        }
    }

    let detector_labels: Option<Vec<u8>> = match labels_csv {
        Some(p) => Some(super::read_score_csv(p)?.1),
        None => None,
    };

    // quantile reference: the standardized training data over the
    // explanation's features
    let z = model.scaler.transform_matrix(&data.values().view())?;
    let reference = project_columns(&z.view(), &model.selected_features);
    let map = QuantileMap::fit(&reference.view())?;

    let mut chart_samples = Vec::new();
    for &i in &sample_ids {
        let raw = data.row(i).to_vec();
        let zi = model.scaler.transform_row(&raw)?;
        let projected: Vec<f64> = model.selected_features.iter().map(|&j| zi[j]).collect();
        let surrogate_label = model.predict(&raw)?;
        let detector_label = detector_labels.as_ref().map(|l| l[i]);
        chart_samples.push((
            format!("sample {i}"),
            projected,
            detector_label,
            Some(surrogate_label),
        ));
    }

    let chart = SaeChart::build(model.feature_names.clone(), &map, chart_samples)?;
    let path = out.join("sae_chart.svg");
    render_chart(&chart, &path)?;
    println!(
        "chart over {} spokes, {} samples",
        chart.axes.len(),
        chart.samples.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}
