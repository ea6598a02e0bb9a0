pub mod bias;
pub mod chart;
pub mod detect;
pub mod evaluate;
pub mod explain;
pub mod predict;
pub mod synth;

use std::path::Path;

/// Write a scores/labels CSV with a stable header.
pub fn write_score_csv(
    path: &Path,
    scores: &[f64],
    labels: &[u8],
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    w.write_record(["score", "label"])?;
    for (s, l) in scores.iter().zip(labels) {
        w.write_record([s.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Read the "score","label" CSV written by `detect`/`predict`.
pub fn read_score_csv(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<u8>)> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for record in r.records() {
        let record = record?;
        scores.push(record[0].parse::<f64>()?);
        labels.push(record[1].parse::<u8>()?);
    }
    Ok((scores, labels))
}
