//! LODA: anomaly scores from an ensemble of one-dimensional histogram
//! density estimators over sparse random projections. Each projection
//! vector has ceil(sqrt(d)) non-zero standard-normal entries; the score
//! of a point is the negative mean log probability mass of its projected
//! bins, so unseen regions score highest. Because every feature
//! participates in only some projections, comparing scores across the
//! two projection groups yields per-feature contributions.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ProteusError, Result};
use crate::seed::derive_seed;

const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct LodaParams {
    pub n_projections: usize,
    /// Histogram bins; `None` uses the Sturges rule ceil(1 + log2 n).
    pub n_bins: Option<usize>,
    pub seed: u64,
}

impl Default for LodaParams {
    fn default() -> Self {
        LodaParams {
            n_projections: 100,
            n_bins: None,
            seed: 0,
        }
    }
}

#[derive(Debug)]
struct Histogram {
    lo: f64,
    width: f64,
    mass: Vec<f64>,
}

impl Histogram {
    fn fit(values: &[f64], n_bins: usize) -> Histogram {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            // all projections equal: one bin carrying the whole mass
            return Histogram {
                lo,
                width: 0.0,
                mass: vec![1.0],
            };
        }
        let width = (hi - lo) / n_bins as f64;
        let mut counts = vec![0usize; n_bins];
        for &v in values {
            let mut b = ((v - lo) / width) as usize;
            if b >= n_bins {
                b = n_bins - 1; // v == hi
            }
            counts[b] += 1;
        }
        let n = values.len() as f64;
        Histogram {
            lo,
            width,
            mass: counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }

    fn probability(&self, v: f64) -> f64 {
        if self.width == 0.0 {
            return if v == self.lo { 1.0 } else { PROBABILITY_FLOOR };
        }
        let offset = v - self.lo;
        if offset < 0.0 {
            return PROBABILITY_FLOOR;
        }
        let mut b = (offset / self.width) as usize;
        if b >= self.mass.len() {
            if v <= self.lo + self.width * self.mass.len() as f64 {
                b = self.mass.len() - 1;
            } else {
                return PROBABILITY_FLOOR;
            }
        }
        self.mass[b].max(PROBABILITY_FLOOR)
    }
}

#[derive(Debug)]
pub struct LodaModel {
    /// Dense projection vectors, one per row.
    projections: Vec<Vec<f64>>,
    histograms: Vec<Histogram>,
    dimension: usize,
}

impl LodaModel {
    pub fn fit(data: &ArrayView2<f64>, params: &LodaParams) -> Result<Self> {
        let (n, d) = data.dim();
        if n < 2 {
            return Err(ProteusError::InvalidData(
                "LODA needs at least 2 samples".into(),
            ));
        }
        if params.n_projections < 1 {
            return Err(ProteusError::InvalidParameter(
                "n_projections must be >= 1".into(),
            ));
        }
        let n_bins = params
            .n_bins
            .unwrap_or_else(|| (1.0 + (n as f64).log2()).ceil() as usize)
            .max(1);
        let nonzero = (d as f64).sqrt().ceil() as usize;

        let mut projections = Vec::with_capacity(params.n_projections);
        let mut histograms = Vec::with_capacity(params.n_projections);
        for p in 0..params.n_projections {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[2, p as u64]));
            let mut w = vec![0.0; d];
            for idx in sample(&mut rng, d, nonzero.min(d)).into_iter() {
                w[idx] = rng.sample(StandardNormal);
            }
            let projected: Vec<f64> = (0..n)
                .map(|i| {
                    w.iter()
                        .zip(data.row(i).iter())
                        .map(|(wi, xi)| wi * xi)
                        .sum()
                })
                .collect();
            histograms.push(Histogram::fit(&projected, n_bins));
            projections.push(w);
        }
        Ok(LodaModel {
            projections,
            histograms,
            dimension: d,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn projected_neg_log_probs(&self, x: &[f64]) -> Vec<f64> {
        self.projections
            .iter()
            .zip(&self.histograms)
            .map(|(w, h)| {
                let z: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
                -h.probability(z).ln()
            })
            .collect()
    }

    /// Negative mean log probability over all projections.
    pub fn score(&self, x: &[f64]) -> f64 {
        let nlp = self.projected_neg_log_probs(x);
        nlp.iter().sum::<f64>() / nlp.len() as f64
    }

    /// Per-feature contribution: mean negative log probability over the
    /// projections that use the feature minus the mean over those that
    /// do not. Features used by all or by no projections contribute 0.
    pub fn feature_contributions(&self, x: &[f64]) -> Vec<f64> {
        let nlp = self.projected_neg_log_probs(x);
        (0..self.dimension)
            .map(|j| {
                let mut with = (0.0, 0usize);
                let mut without = (0.0, 0usize);
                for (w, &v) in self.projections.iter().zip(&nlp) {
                    if w[j] != 0.0 {
                        with = (with.0 + v, with.1 + 1);
                    } else {
                        without = (without.0 + v, without.1 + 1);
                    }
                }
                if with.1 == 0 || without.1 == 0 {
                    0.0
                } else {
                    with.0 / with.1 as f64 - without.0 / without.1 as f64
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn single_bin_data_scores_zero() {
        // every projection maps the whole sample into one bin
        let data = Array2::from_shape_fn((20, 2), |(i, _)| (i % 2) as f64 * 1e-9);
        let model = LodaModel::fit(
            &data.view(),
            &LodaParams {
                n_projections: 10,
                n_bins: Some(1),
                seed: 1,
            },
        )
        .unwrap();
        for i in 0..20 {
            assert_abs_diff_eq!(model.score(&data.row(i).to_vec()), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn point_outside_all_supports_hits_the_floor_score() {
        let data = Array2::from_shape_fn((50, 3), |(i, j)| ((i + j) % 7) as f64 * 0.1);
        let model = LodaModel::fit(&data.view(), &LodaParams::default()).unwrap();
        let far = vec![1e9; 3];
        let expected = -(PROBABILITY_FLOOR.ln());
        assert_abs_diff_eq!(model.score(&far), expected, epsilon = 1e-9);
        // nothing can exceed the floor score
        for i in 0..50 {
            assert!(model.score(&data.row(i).to_vec()) <= expected + 1e-12);
        }
    }

    #[test]
    fn contributions_point_at_the_responsible_feature() {
        // d=4 gives ceil(sqrt(4))=2 non-zeros per projection, so each
        // feature appears in only some projections and the one-sided
        // contribution statistic is informative. The anomaly is extreme
        // only in feature 0.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut values = Vec::new();
        for _ in 0..100 {
            for _ in 0..4 {
                values.push(rng.gen_range(-1.0..1.0));
            }
        }
        let data = Array2::from_shape_vec((100, 4), values).unwrap();
        let model = LodaModel::fit(&data.view(), &LodaParams::default()).unwrap();
        let anomaly = vec![30.0, 0.0, 0.0, 0.0];
        let contrib = model.feature_contributions(&anomaly);
        for j in 1..4 {
            assert!(
                contrib[0] > contrib[j],
                "contrib {contrib:?} should favor feature 0"
            );
        }

        // centroid of a symmetric dataset contributes roughly nothing
        let centroid = vec![0.0; 4];
        let c = model.feature_contributions(&centroid);
        for v in c {
            assert!(v.abs() < 1.0, "centroid contribution {v}");
        }
    }

    #[test]
    fn unused_feature_contributes_zero() {
        // d=1: the single feature is used by every projection
        let data = Array2::from_shape_fn((30, 1), |(i, _)| i as f64);
        let model = LodaModel::fit(&data.view(), &LodaParams::default()).unwrap();
        let contrib = model.feature_contributions(&[5.0]);
        assert_eq!(contrib, vec![0.0]);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = Array2::from_shape_fn((40, 4), |(i, j)| ((i * 3 + j) % 11) as f64);
        let params = LodaParams {
            n_projections: 25,
            n_bins: None,
            seed: 77,
        };
        let a = LodaModel::fit(&data.view(), &params).unwrap();
        let b = LodaModel::fit(&data.view(), &params).unwrap();
        for i in 0..40 {
            let row = data.row(i).to_vec();
            assert_eq!(a.score(&row), b.score(&row));
        }
    }
}
