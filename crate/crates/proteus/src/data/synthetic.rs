//! Regenerated synthetic benchmark with a known explaining subspace.
//!
//! The parent dataset has 867 samples over 5 features and 10 anomalies
//! (≈1% ratio). Features 0–1 lie on a noisy line; features 2–4 lie on a
//! noisy rank-2 plane whose loadings keep all three pairwise correlated.
//! Half the anomalies are displaced off the line, half off the plane
//! along its normal vector, always from mid-range latent positions, so
//! every anomaly is marginally unremarkable per feature and invisible in
//! every strict subspace of its block, yet far outside the block's joint
//! structure. Higher-dimensional variants append independent
//! standard-normal noise features.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::Result;
use crate::seed::derive_seed;

pub const PARENT_SAMPLES: usize = 867;
pub const PARENT_FEATURES: usize = 5;
pub const PARENT_ANOMALIES: usize = 10;

// latent variables are uniform with unit variance
const LATENT_HALF_WIDTH: f64 = 1.732_050_807_568_877_2; // sqrt(3)
const NOISE: f64 = 0.25;

// plane loadings for the triple block: x_j = COMMON*t1 + SPREAD_j*t2 + noise
// with SPREAD = (g, 0, -g); every pair stays positively correlated while
// the block itself has rank 2.
const COMMON: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2
const SPREAD: f64 = 0.5;

// unit normal of the plane: orthogonal to (1,1,1) and (1,0,-1)
const PLANE_NORMAL: [f64; 3] = [
    -0.408_248_290_463_863,
    0.816_496_580_927_726,
    -0.408_248_290_463_863,
];

/// A generated parent dataset plus its gold-standard explanation.
#[derive(Debug, Clone)]
pub struct SyntheticBenchmark {
    pub dataset: Dataset,
    /// The correlated pair subspace.
    pub subspace_pair: Vec<usize>,
    /// The correlated triple subspace.
    pub subspace_triple: Vec<usize>,
    /// Rows anomalous with respect to the pair subspace.
    pub anomaly_rows_pair: Vec<usize>,
    /// Rows anomalous with respect to the triple subspace.
    pub anomaly_rows_triple: Vec<usize>,
}

impl SyntheticBenchmark {
    /// Union of the two anomalous subspaces: the full gold standard.
    pub fn gold_subspace(&self) -> Vec<usize> {
        let mut s = self.subspace_pair.clone();
        s.extend_from_slice(&self.subspace_triple);
        s.sort_unstable();
        s
    }
}

fn draw_pair(rng: &mut ChaCha8Rng) -> [f64; 2] {
    let t = rng.gen_range(-LATENT_HALF_WIDTH..LATENT_HALF_WIDTH);
    let e0: f64 = rng.sample(StandardNormal);
    let e1: f64 = rng.sample(StandardNormal);
    [t + NOISE * e0, t + NOISE * e1]
}

fn draw_triple(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let t1 = rng.gen_range(-LATENT_HALF_WIDTH..LATENT_HALF_WIDTH);
    let t2 = rng.gen_range(-LATENT_HALF_WIDTH..LATENT_HALF_WIDTH);
    let spread = [SPREAD, 0.0, -SPREAD];
    let mut out = [0.0; 3];
    for (j, v) in out.iter_mut().enumerate() {
        let e: f64 = rng.sample(StandardNormal);
        *v = COMMON * t1 + spread[j] * t2 + NOISE * e;
    }
    out
}

fn jitter(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.92..1.08)
}

/// Regenerate the 867×5 parent benchmark. Gold labels are set and the
/// anomalous subspaces are reported alongside the data.
pub fn make_hics_like_parent(seed: u64) -> SyntheticBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x9a17]));
    let n_normal = PARENT_SAMPLES - PARENT_ANOMALIES;

    let mut rows: Vec<[f64; PARENT_FEATURES]> = Vec::with_capacity(PARENT_SAMPLES);
    for _ in 0..n_normal {
        let p = draw_pair(&mut rng);
        let t = draw_triple(&mut rng);
        rows.push([p[0], p[1], t[0], t[1], t[2]]);
    }

    // Anomalies start from a mid-range point of their block's structure
    // and move off it: pair anomalies leave the line along (1,-1)/sqrt(2),
    // triple anomalies leave the plane along its normal. The direction is
    // consistent across anomalies; the magnitude keeps every coordinate
    // marginally unremarkable while the residual against the structure is
    // many noise deviations wide.
    let mut anomaly_kind: Vec<bool> = Vec::new(); // true = pair block
    for i in 0..PARENT_ANOMALIES {
        let in_pair = i % 2 == 0;
        anomaly_kind.push(in_pair);
        let mut row = {
            let p = draw_pair(&mut rng);
            let t = draw_triple(&mut rng);
            [p[0], p[1], t[0], t[1], t[2]]
        };
        if in_pair {
            let t0 = rng.gen_range(-0.6..0.6);
            let offset = rng.gen_range(1.25..1.55);
            row[0] = t0 + offset * jitter(&mut rng);
            row[1] = t0 - offset * jitter(&mut rng);
        } else {
            let t1 = rng.gen_range(-0.6..0.6);
            let t2 = rng.gen_range(-0.6..0.6);
            let magnitude = rng.gen_range(1.5..1.9);
            let spread = [SPREAD, 0.0, -SPREAD];
            for j in 0..3 {
                row[2 + j] = COMMON * t1
                    + spread[j] * t2
                    + PLANE_NORMAL[j] * magnitude * jitter(&mut rng);
            }
        }
        rows.push(row);
    }

    // Shuffle the row order so anomalies are scattered through the file.
    let mut order: Vec<usize> = (0..PARENT_SAMPLES).collect();
    order.shuffle(&mut rng);

    let mut values = Array2::zeros((PARENT_SAMPLES, PARENT_FEATURES));
    let mut gold = vec![0u8; PARENT_SAMPLES];
    let mut anomaly_rows_pair = Vec::new();
    let mut anomaly_rows_triple = Vec::new();
    for (new_row, &src) in order.iter().enumerate() {
        for j in 0..PARENT_FEATURES {
            values[[new_row, j]] = rows[src][j];
        }
        if src >= n_normal {
            gold[new_row] = 1;
            if anomaly_kind[src - n_normal] {
                anomaly_rows_pair.push(new_row);
            } else {
                anomaly_rows_triple.push(new_row);
            }
        }
    }
    anomaly_rows_pair.sort_unstable();
    anomaly_rows_triple.sort_unstable();

    let names = (1..=PARENT_FEATURES).map(|i| format!("f{i}")).collect();
    let dataset = Dataset::new(values, names, Some(gold), None)
        .expect("generated benchmark is always valid");

    SyntheticBenchmark {
        dataset,
        subspace_pair: vec![0, 1],
        subspace_triple: vec![2, 3, 4],
        anomaly_rows_pair,
        anomaly_rows_triple,
    }
}

/// Append `n_irrelevant` i.i.d. standard-normal noise features to a
/// parent dataset. Parent columns, order, and gold labels are untouched;
/// appended columns are named with an `irr_` prefix.
pub fn generate_synthetic(parent: &Dataset, n_irrelevant: usize, seed: u64) -> Result<Dataset> {
    let n = parent.n_samples();
    let d = parent.n_features();
    let mut values = Array2::zeros((n, d + n_irrelevant));
    values
        .slice_mut(ndarray::s![.., ..d])
        .assign(parent.values());

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x1772, n_irrelevant as u64]));
    for j in 0..n_irrelevant {
        for i in 0..n {
            values[[i, d + j]] = rng.sample(StandardNormal);
        }
    }

    let mut names = parent.feature_names().to_vec();
    for j in 1..=n_irrelevant {
        names.push(format!("irr_{j}"));
    }
    Dataset::new(
        values,
        names,
        parent.gold_labels().map(|g| g.to_vec()),
        parent.group_ids().map(|g| g.to_vec()),
    )
}
