//! Detector-supervised minority oversampling.
//!
//! Each detector-flagged anomaly `a` spawns up to `ps` pseudo-samples
//! `a' = a + p` with `p ~ N(0, sigma^2 I)` in the standardized space the
//! detector was fitted on. A draw is kept only if the detector itself
//! labels it anomalous; rejected draws are retried up to a bounded
//! number of attempts. An anomaly and its accepted pseudo-samples form
//! one group; every other sample is a singleton group.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::LabeledDataset;
use crate::detect::AnomalyJudge;
use crate::error::{ProteusError, Result};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy)]
pub struct OversampleParams {
    /// Pseudo-samples requested per anomaly.
    pub ps: usize,
    /// Perturbation standard deviation.
    pub sigma: f64,
    /// Redraw budget per pseudo-sample before giving up.
    pub max_attempts_per_pseudo: usize,
    pub seed: u64,
}

impl OversampleParams {
    pub fn new(ps: usize, seed: u64) -> Self {
        OversampleParams {
            ps,
            sigma: 0.1,
            max_attempts_per_pseudo: 50,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(ProteusError::InvalidParameter(
                "sigma must be positive".into(),
            ));
        }
        if self.max_attempts_per_pseudo == 0 {
            return Err(ProteusError::InvalidParameter(
                "max_attempts_per_pseudo must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// How completely each anomaly's pseudo-sample quota was filled.
#[derive(Debug, Clone, Default)]
pub struct FillRateSummary {
    pub requested_per_anomaly: usize,
    pub accepted_total: usize,
    pub requested_total: usize,
    /// (anomaly row, accepted count) for anomalies that under-filled.
    pub underfilled: Vec<(usize, usize)>,
}

impl FillRateSummary {
    pub fn fill_rate(&self) -> f64 {
        if self.requested_total == 0 {
            1.0
        } else {
            self.accepted_total as f64 / self.requested_total as f64
        }
    }
}

/// A labeled dataset extended with grouped pseudo-samples.
#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    pub base: LabeledDataset,
    /// Accepted pseudo-samples, one per row.
    pub pseudo_rows: Array2<f64>,
    /// Parent anomaly (original row index) of each pseudo-row.
    pub pseudo_parent: Vec<usize>,
    /// Group id per combined row (originals first, then pseudo-rows).
    /// An original's group id is its own row index.
    pub group_ids: Vec<usize>,
    pub fill: FillRateSummary,
}

impl AugmentedDataset {
    pub fn n_original(&self) -> usize {
        self.base.n_samples()
    }

    pub fn n_pseudo(&self) -> usize {
        self.pseudo_rows.nrows()
    }

    pub fn n_total(&self) -> usize {
        self.n_original() + self.n_pseudo()
    }

    /// Label of a combined row: pseudo-rows are anomalies by construction.
    pub fn label(&self, row: usize) -> u8 {
        if row < self.n_original() {
            self.base.detector_labels[row]
        } else {
            1
        }
    }

    pub fn labels(&self) -> Vec<u8> {
        (0..self.n_total()).map(|i| self.label(i)).collect()
    }

    /// The combined matrix: original rows followed by pseudo-rows.
    pub fn combined_matrix(&self) -> Array2<f64> {
        let d = self.base.data.n_features();
        let mut out = Array2::zeros((self.n_total(), d));
        out.slice_mut(ndarray::s![..self.n_original(), ..])
            .assign(self.base.data.values());
        if self.n_pseudo() > 0 {
            out.slice_mut(ndarray::s![self.n_original().., ..])
                .assign(&self.pseudo_rows);
        }
        out
    }
}

/// Generate supervised pseudo-samples around every detector-flagged
/// anomaly. Deterministic given the seed, including the rejection and
/// redraw sequence; each anomaly draws from its own derived stream.
pub fn oversample(
    data: &LabeledDataset,
    judge: &dyn AnomalyJudge,
    params: &OversampleParams,
) -> Result<AugmentedDataset> {
    params.validate()?;
    let anomalies = data.anomaly_indices();
    if anomalies.is_empty() {
        return Err(ProteusError::InvalidData(
            "oversampling needs at least one detector-flagged anomaly".into(),
        ));
    }
    let d = data.data.n_features();
    let n = data.n_samples();

    let mut pseudo_flat: Vec<f64> = Vec::new();
    let mut pseudo_parent: Vec<usize> = Vec::new();
    let mut fill = FillRateSummary {
        requested_per_anomaly: params.ps,
        requested_total: params.ps * anomalies.len(),
        ..Default::default()
    };

    for &a in &anomalies {
        let parent = data.data.row(a);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[3, a as u64]));
        let mut accepted = 0usize;
        for _ in 0..params.ps {
            for _ in 0..params.max_attempts_per_pseudo {
                let candidate: Vec<f64> = parent
                    .iter()
                    .map(|&v| v + params.sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                if judge.is_anomaly(&candidate) {
                    pseudo_flat.extend_from_slice(&candidate);
                    pseudo_parent.push(a);
                    accepted += 1;
                    break;
                }
            }
        }
        fill.accepted_total += accepted;
        if accepted < params.ps {
            fill.underfilled.push((a, accepted));
        }
    }

    let n_pseudo = pseudo_parent.len();
    let pseudo_rows = Array2::from_shape_vec((n_pseudo, d), pseudo_flat)
        .map_err(|e| ProteusError::InvalidData(e.to_string()))?;

    let mut group_ids: Vec<usize> = (0..n).collect();
    group_ids.extend(pseudo_parent.iter().copied());

    Ok(AugmentedDataset {
        base: data.clone(),
        pseudo_rows,
        pseudo_parent,
        group_ids,
        fill,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use ndarray::Array2;

    struct AcceptAll;
    impl AnomalyJudge for AcceptAll {
        fn anomaly_score(&self, _x: &[f64]) -> f64 {
            1.0
        }
        fn is_anomaly(&self, _x: &[f64]) -> bool {
            true
        }
    }

    /// Half-space judge: anomalous iff coordinate 0 exceeds the boundary.
    struct HalfSpace {
        boundary: f64,
    }
    impl AnomalyJudge for HalfSpace {
        fn anomaly_score(&self, x: &[f64]) -> f64 {
            x[0]
        }
        fn is_anomaly(&self, x: &[f64]) -> bool {
            x[0] > self.boundary
        }
    }

    fn labeled_with_anomalies(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> LabeledDataset {
        let n = rows.len();
        let d = rows[0].len();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let values = Array2::from_shape_vec((n, d), flat).unwrap();
        let names = (0..d).map(|j| format!("x{j}")).collect();
        let data = Dataset::new(values, names, None, None).unwrap();
        let scores: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
        LabeledDataset::new(data, labels, scores, 0.5).unwrap()
    }

    #[test]
    fn ps_zero_is_identity() {
        let data = labeled_with_anomalies(
            vec![vec![0.0, 0.0], vec![5.0, 5.0]],
            vec![0, 1],
        );
        let aug = oversample(&data, &AcceptAll, &OversampleParams::new(0, 1)).unwrap();
        assert_eq!(aug.n_pseudo(), 0);
        assert_eq!(aug.n_total(), 2);
        assert_eq!(aug.group_ids, vec![0, 1]);
        assert_eq!(aug.fill.fill_rate(), 1.0);
        assert_eq!(aug.combined_matrix(), *data.data.values());
    }

    #[test]
    fn degenerate_judge_accepts_everything_first_try() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, -(i as f64)]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let data = labeled_with_anomalies(rows, labels);
        let aug = oversample(&data, &AcceptAll, &OversampleParams::new(3, 7)).unwrap();
        assert_eq!(aug.n_pseudo(), 30);
        assert!(aug.fill.underfilled.is_empty());
        // grouping: pseudo rows carry their parent's group
        for (k, &parent) in aug.pseudo_parent.iter().enumerate() {
            assert_eq!(aug.group_ids[20 + k], parent);
            assert_eq!(aug.label(20 + k), 1);
        }
    }

    #[test]
    fn acceptance_rate_matches_gaussian_tail() {
        // anomaly at x0 = 10.05, boundary at 10, sigma 0.1:
        // P(accept) = P(N(0.05, 0.1^2) > 0) = Phi(0.5) ≈ 0.6915
        let data = labeled_with_anomalies(
            vec![vec![0.0, 0.0], vec![10.05, 0.0]],
            vec![0, 1],
        );
        let judge = HalfSpace { boundary: 10.0 };
        let params = OversampleParams {
            ps: 10_000,
            sigma: 0.1,
            max_attempts_per_pseudo: 1,
            seed: 42,
        };
        let aug = oversample(&data, &judge, &params).unwrap();
        let rate = aug.fill.fill_rate();
        assert!(
            (rate - 0.6915).abs() < 0.03,
            "acceptance rate {rate} far from Phi(0.5)"
        );
        // supervision: every retained pseudo-sample is past the boundary
        for i in 0..aug.n_pseudo() {
            assert!(aug.pseudo_rows[[i, 0]] > 10.0);
        }
    }

    #[test]
    fn reproducible_including_redraws() {
        let data = labeled_with_anomalies(
            vec![vec![0.0, 1.0], vec![10.02, -3.0], vec![10.3, 4.0]],
            vec![0, 1, 1],
        );
        let judge = HalfSpace { boundary: 10.0 };
        let params = OversampleParams::new(5, 99);
        let a = oversample(&data, &judge, &params).unwrap();
        let b = oversample(&data, &judge, &params).unwrap();
        assert_eq!(a.pseudo_rows, b.pseudo_rows);
        assert_eq!(a.pseudo_parent, b.pseudo_parent);
        assert_eq!(a.fill.accepted_total, b.fill.accepted_total);
    }

    #[test]
    fn underfill_is_reported_not_fatal() {
        // anomaly sits far below the boundary: nothing gets accepted
        let data = labeled_with_anomalies(
            vec![vec![0.0, 0.0], vec![9.0, 0.0]],
            vec![0, 1],
        );
        let judge = HalfSpace { boundary: 10.0 };
        let params = OversampleParams {
            ps: 4,
            sigma: 0.1,
            max_attempts_per_pseudo: 5,
            seed: 1,
        };
        let aug = oversample(&data, &judge, &params).unwrap();
        assert_eq!(aug.n_pseudo(), 0);
        assert_eq!(aug.fill.underfilled, vec![(1, 0)]);
        assert_eq!(aug.fill.fill_rate(), 0.0);
    }
}
