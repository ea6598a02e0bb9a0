use std::io::Write as _;
use std::path::Path;

use proteus::data::{generate_synthetic, make_hics_like_parent, Dataset, PARENT_FEATURES};

use crate::config::RunConfig;

/// Write a dataset as CSV with its gold-label column appended.
pub fn write_dataset_csv(data: &Dataset, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    let mut header: Vec<String> = data.feature_names().to_vec();
    let has_gold = data.gold_labels().is_some();
    if has_gold {
        header.push("is_anomaly".into());
    }
    w.write_record(&header)?;
    for i in 0..data.n_samples() {
        let mut record: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        if let Some(gold) = data.gold_labels() {
            record.push(gold[i].to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(config: &RunConfig, seed: u64, out: &Path) -> anyhow::Result<()> {
    let bench = make_hics_like_parent(seed);
    let parent_path = out.join("synthetic_parent.csv");
    write_dataset_csv(&bench.dataset, &parent_path)?;
    println!("wrote {}", parent_path.display());

    for &dim in &config.experiment.dims {
        if dim < PARENT_FEATURES {
            anyhow::bail!("dimension {dim} is below the parent feature count");
        }
        if dim == PARENT_FEATURES {
            continue; // the parent file already covers it
        }
        let wide = generate_synthetic(&bench.dataset, dim - PARENT_FEATURES, seed)?;
        let path = out.join(format!("synthetic_{dim:03}.csv"));
        write_dataset_csv(&wide, &path)?;
        println!("wrote {}", path.display());
    }

    let sidecar = out.join("gold_subspace.txt");
    let mut f = std::fs::File::create(&sidecar)?;
    writeln!(f, "# gold-standard explaining subspace of the synthetic benchmark")?;
    for &j in &bench.gold_subspace() {
        writeln!(f, "{j} {}", bench.dataset.feature_names()[j])?;
    }
    writeln!(f, "# pair subspace: {:?}", bench.subspace_pair)?;
    writeln!(f, "# triple subspace: {:?}", bench.subspace_triple)?;
    println!("wrote {}", sidecar.display());
    Ok(())
}
