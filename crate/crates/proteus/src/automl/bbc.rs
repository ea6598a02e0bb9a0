//! Bootstrap bias correction for the winner's curse.
//!
//! Reporting the best configuration's cross-validation AUC overstates
//! performance: the maximum of many noisy estimates is optimistic. The
//! correction resamples prediction-matrix row groups with replacement,
//! picks the winning configuration on the in-bag rows, and evaluates it
//! on the out-of-bag rows; averaging over draws (and repeats) estimates
//! the performance of the *selection process* rather than the luckiest
//! column.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ProteusError, Result};
use crate::metrics::{auc, auc_weighted};
use crate::seed::derive_seed;

const MAX_REDRAWS: usize = 1000;

/// Corrected AUC estimate from per-repeat prediction matrices.
/// `groups[i]` is the resampling unit of original row `i`; rows sharing
/// a group enter or leave a bootstrap draw together. `tie_break` holds a
/// lower-is-better value per configuration (the mean selected-subset
/// size) so in-bag winner selection mirrors the deployed selection rule
/// when AUCs tie; pass an empty slice to fall back to config order.
pub fn bbc_correct(
    matrices: &[Array2<f64>],
    labels: &[u8],
    groups: &[usize],
    tie_break: &[f64],
    bootstraps: usize,
    seed: u64,
) -> Result<f64> {
    if bootstraps < 1 {
        return Err(ProteusError::InvalidParameter(
            "bootstraps must be >= 1".into(),
        ));
    }
    if matrices.is_empty() {
        return Err(ProteusError::InvalidData("no prediction matrices".into()));
    }
    let n = labels.len();
    if groups.len() != n {
        return Err(ProteusError::InvalidData(
            "labels/groups length mismatch".into(),
        ));
    }
    if !labels.contains(&1) || !labels.contains(&0) {
        return Err(ProteusError::InvalidData(
            "bbc needs both classes present".into(),
        ));
    }

    let mut unique_groups: Vec<usize> = groups.to_vec();
    unique_groups.sort_unstable();
    unique_groups.dedup();
    let n_groups = unique_groups.len();
    let group_pos: std::collections::HashMap<usize, usize> = unique_groups
        .iter()
        .enumerate()
        .map(|(pos, &g)| (g, pos))
        .collect();
    let row_group: Vec<usize> = groups.iter().map(|g| group_pos[g]).collect();
    let rows_of_group: Vec<Vec<usize>> = {
        let mut v = vec![Vec::new(); n_groups];
        for (row, &g) in row_group.iter().enumerate() {
            v[g].push(row);
        }
        v
    };

    let mut repeat_estimates = Vec::with_capacity(matrices.len());
    for (r, matrix) in matrices.iter().enumerate() {
        if matrix.nrows() != n {
            return Err(ProteusError::InvalidData(
                "prediction matrix row count does not match labels".into(),
            ));
        }
        let n_cfg = matrix.ncols();
        // ascending order per configuration column, computed once
        let orders: Vec<Vec<usize>> = (0..n_cfg)
            .map(|c| {
                let col = matrix.column(c);
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).unwrap());
                order
            })
            .collect();
        let columns: Vec<Vec<f64>> = (0..n_cfg).map(|c| matrix.column(c).to_vec()).collect();

        let draws: Vec<Result<f64>> = (0..bootstraps)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    seed,
                    &[7, r as u64, b as u64],
                ));
                for _ in 0..MAX_REDRAWS {
                    let mut weights = vec![0.0f64; n];
                    for _ in 0..n_groups {
                        let g = rng.gen_range(0..n_groups);
                        for &row in &rows_of_group[g] {
                            weights[row] += 1.0;
                        }
                    }
                    let out_rows: Vec<usize> =
                        (0..n).filter(|&i| weights[i] == 0.0).collect();
                    if out_rows.is_empty()
                        || !out_rows.iter().any(|&i| labels[i] == 1)
                        || !out_rows.iter().any(|&i| labels[i] == 0)
                    {
                        continue; // undefined draw: redraw
                    }

                    // winner on the in-bag multiset; exact AUC ties break
                    // like real selection (smaller subset, then lower id)
                    let mut best: Option<(usize, f64)> = None;
                    for c in 0..n_cfg {
                        if let Some(a) =
                            auc_weighted(&orders[c], &columns[c], labels, &weights)
                        {
                            let better = match best {
                                None => true,
                                Some((bc, ba)) => {
                                    a > ba
                                        || (a == ba
                                            && !tie_break.is_empty()
                                            && tie_break[c] < tie_break[bc])
                                }
                            };
                            if better {
                                best = Some((c, a));
                            }
                        }
                    }
                    let (winner, _) = match best {
                        Some(w) => w,
                        None => continue,
                    };

                    let oob_scores: Vec<f64> =
                        out_rows.iter().map(|&i| columns[winner][i]).collect();
                    let oob_labels: Vec<u8> = out_rows.iter().map(|&i| labels[i]).collect();
                    return auc(&oob_scores, &oob_labels);
                }
                Err(ProteusError::InvalidData(
                    "bootstrap could not produce a two-class out-of-bag set".into(),
                ))
            })
            .collect();

        let mut total = 0.0;
        for d in draws {
            total += d?;
        }
        repeat_estimates.push(total / bootstraps as f64);
    }

    Ok(repeat_estimates.iter().sum::<f64>() / repeat_estimates.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn noise_matrix(seed: u64, n: usize, n_cfg: usize) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, n_cfg), |_| rng.gen_range(0.0..1.0))
    }

    #[test]
    fn single_column_estimate_converges_to_pooled_auc() {
        let n = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 0)).collect();
        let scores: Vec<f64> = labels
            .iter()
            .map(|&l| f64::from(l) * 0.6 + rng.gen_range(0.0..0.7))
            .collect();
        let matrix = Array2::from_shape_vec((n, 1), scores.clone()).unwrap();
        let pooled = auc(&scores, &labels).unwrap();
        let groups: Vec<usize> = (0..n).collect();
        let estimate = bbc_correct(&[matrix], &labels, &groups, &[], 1000, 3).unwrap();
        assert!(
            (estimate - pooled).abs() < 0.02,
            "bbc {estimate} vs pooled {pooled}"
        );
    }

    #[test]
    fn dominant_column_is_tracked_not_inflated() {
        let n = 150;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
        let mut matrix = noise_matrix(1, n, 2);
        for i in 0..n {
            matrix[[i, 1]] = f64::from(labels[i]) * 2.0 + rng.gen_range(0.0..0.5);
        }
        let dominant: Vec<f64> = matrix.column(1).to_vec();
        let pooled = auc(&dominant, &labels).unwrap();
        let groups: Vec<usize> = (0..n).collect();
        let estimate = bbc_correct(&[matrix], &labels, &groups, &[], 500, 5).unwrap();
        assert!((estimate - pooled).abs() < 0.03);
    }

    #[test]
    fn pure_noise_winner_is_corrected_to_chance() {
        let n = 200;
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 0)).collect();
        let matrix = noise_matrix(7, n, 100);
        // raw winner's-curse estimate is clearly optimistic
        let raw_max = (0..100)
            .map(|c| auc(&matrix.column(c).to_vec(), &labels).unwrap())
            .fold(f64::MIN, f64::max);
        assert!(raw_max >= 0.55, "raw max {raw_max}");
        let groups: Vec<usize> = (0..n).collect();
        let estimate = bbc_correct(&[matrix], &labels, &groups, &[], 500, 11).unwrap();
        assert!(
            (estimate - 0.5).abs() < 0.05,
            "bbc {estimate} should be near chance"
        );
    }
}
