//! Local Outlier Factor. The score of a point is the mean ratio of its
//! k-neighbors' local reachability density to its own:
//!
//!   lrd(p) = 1 / mean_{o in kNN(p)} max(k_dist(o), d(p, o))
//!   LOF(p) = mean_{o in kNN(p)} lrd(o) / lrd(p)
//!
//! Values near 1 mean uniform density; much larger means outlier.
//! Reachability distances are floored so exact duplicates cannot produce
//! NaN or infinity. Out-of-sample points are scored against the training
//! neighbor index; training rows themselves use leave-self-out
//! neighborhoods.

use ndarray::ArrayView2;

use crate::error::{ProteusError, Result};

const DISTANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct LofParams {
    pub k_neighbors: usize,
}

impl Default for LofParams {
    fn default() -> Self {
        LofParams { k_neighbors: 15 }
    }
}

#[derive(Debug)]
pub struct LofIndex {
    train: Vec<Vec<f64>>,
    k: usize,
    k_dist: Vec<f64>,
    lrd: Vec<f64>,
    training_scores: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// k nearest of `point` among `train`, excluding index `skip` if given.
/// Ties break toward the lower index so neighborhoods are deterministic.
fn k_nearest(train: &[Vec<f64>], point: &[f64], k: usize, skip: Option<usize>) -> Vec<(f64, usize)> {
    let mut dists: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, row)| (euclidean(point, row), i))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists
}

impl LofIndex {
    pub fn fit(data: &ArrayView2<f64>, params: &LofParams) -> Result<Self> {
        let n = data.nrows();
        let k = params.k_neighbors;
        if k < 1 || k >= n {
            return Err(ProteusError::InvalidParameter(format!(
                "LOF needs 1 <= k < n, got k={k} with n={n}"
            )));
        }
        let train: Vec<Vec<f64>> = (0..n).map(|i| data.row(i).to_vec()).collect();

        let neighbors: Vec<Vec<(f64, usize)>> = (0..n)
            .map(|i| k_nearest(&train, &train[i], k, Some(i)))
            .collect();
        let k_dist: Vec<f64> = neighbors.iter().map(|nb| nb[k - 1].0).collect();

        let lrd: Vec<f64> = (0..n)
            .map(|i| {
                let mean_reach = neighbors[i]
                    .iter()
                    .map(|&(d, o)| d.max(k_dist[o]).max(DISTANCE_FLOOR))
                    .sum::<f64>()
                    / k as f64;
                1.0 / mean_reach
            })
            .collect();

        let training_scores: Vec<f64> = (0..n)
            .map(|i| {
                neighbors[i].iter().map(|&(_, o)| lrd[o]).sum::<f64>() / (k as f64 * lrd[i])
            })
            .collect();

        Ok(LofIndex {
            train,
            k,
            k_dist,
            lrd,
            training_scores,
        })
    }

    pub fn dimension(&self) -> usize {
        self.train[0].len()
    }

    pub fn training_scores(&self) -> &[f64] {
        &self.training_scores
    }

    /// Score a new point against the training index.
    pub fn score(&self, x: &[f64]) -> f64 {
        let neighbors = k_nearest(&self.train, x, self.k, None);
        let mean_reach = neighbors
            .iter()
            .map(|&(d, o)| d.max(self.k_dist[o]).max(DISTANCE_FLOOR))
            .sum::<f64>()
            / self.k as f64;
        let lrd_x = 1.0 / mean_reach;
        neighbors.iter().map(|&(_, o)| self.lrd[o]).sum::<f64>() / (self.k as f64 * lrd_x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    #[test]
    fn grid_interior_point_scores_near_one() {
        // 7x7 uniform grid; check an interior point
        let mut values = Vec::new();
        for i in 0..7 {
            for j in 0..7 {
                values.push(i as f64);
                values.push(j as f64);
            }
        }
        let data = Array2::from_shape_vec((49, 2), values).unwrap();
        let lof = LofIndex::fit(&data.view(), &LofParams { k_neighbors: 8 }).unwrap();
        let center = 3 * 7 + 3;
        let score = lof.training_scores()[center];
        assert!((score - 1.0).abs() < 0.15, "interior LOF {score}");
    }

    #[test]
    fn distant_point_has_max_lof() {
        let mut values = Vec::new();
        for i in 0..10 {
            values.push((i as f64) * 0.1);
            values.push(((i * 3) % 10) as f64 * 0.1);
        }
        values.push(100.0);
        values.push(100.0);
        let data = Array2::from_shape_vec((11, 2), values).unwrap();
        let lof = LofIndex::fit(&data.view(), &LofParams { k_neighbors: 3 }).unwrap();
        let scores = lof.training_scores();
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(scores[10], max);
        assert!(scores[10] > 10.0);
    }

    /// Direct translation of the reachability/lrd definitions, kept
    /// independent of the implementation above.
    fn lof_oracle(points: &[Vec<f64>], k: usize) -> Vec<f64> {
        let n = points.len();
        let dist =
            |a: usize, b: usize| euclidean(&points[a], &points[b]);
        let mut knn: Vec<Vec<usize>> = Vec::new();
        let mut kdist = vec![0.0; n];
        for i in 0..n {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| {
                dist(i, a)
                    .partial_cmp(&dist(i, b))
                    .unwrap()
                    .then(a.cmp(&b))
            });
            others.truncate(k);
            kdist[i] = dist(i, others[k - 1]);
            knn.push(others);
        }
        let reach = |i: usize, o: usize| dist(i, o).max(kdist[o]).max(1e-12);
        let lrd: Vec<f64> = (0..n)
            .map(|i| {
                let m: f64 = knn[i].iter().map(|&o| reach(i, o)).sum::<f64>() / k as f64;
                1.0 / m
            })
            .collect();
        (0..n)
            .map(|i| knn[i].iter().map(|&o| lrd[o]).sum::<f64>() / (k as f64 * lrd[i]))
            .collect()
    }

    #[test]
    fn four_point_configuration_matches_brute_force_oracle() {
        // unit triangle plus one point far away, k = 2
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.866_025_403_784_438_6],
            vec![10.0, 0.0],
        ];
        let flat: Vec<f64> = pts.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((4, 2), flat).unwrap();
        let lof = LofIndex::fit(&data.view(), &LofParams { k_neighbors: 2 }).unwrap();
        let expected = lof_oracle(&pts, 2);
        for i in 0..4 {
            assert_abs_diff_eq!(lof.training_scores()[i], expected[i], epsilon = 1e-9);
        }
        assert!(lof.training_scores()[3] > 2.0);
    }

    #[test]
    fn duplicates_never_produce_nan() {
        let mut values = vec![1.0, 1.0, 1.0, 1.0]; // exact duplicate pair
        for i in 0..8 {
            values.push(i as f64 * 0.3 + 2.0);
            values.push(i as f64 * 0.11);
        }
        let data = Array2::from_shape_vec((10, 2), values).unwrap();
        let lof = LofIndex::fit(&data.view(), &LofParams { k_neighbors: 2 }).unwrap();
        for &s in lof.training_scores() {
            assert!(s.is_finite());
        }
        assert!(lof.score(&[1.0, 1.0]).is_finite());
    }

    #[test]
    fn out_of_sample_scoring_tracks_training_density() {
        let mut values = Vec::new();
        for i in 0..30 {
            values.push((i % 6) as f64 * 0.2);
            values.push((i / 6) as f64 * 0.2);
        }
        let data = Array2::from_shape_vec((30, 2), values).unwrap();
        let lof = LofIndex::fit(&data.view(), &LofParams { k_neighbors: 5 }).unwrap();
        let inside = lof.score(&[0.5, 0.5]);
        let outside = lof.score(&[8.0, 8.0]);
        assert!(outside > 5.0 * inside);
    }

    #[test]
    fn k_must_be_less_than_n() {
        let data = Array2::zeros((5, 2));
        assert!(LofIndex::fit(&data.view(), &LofParams { k_neighbors: 5 }).is_err());
    }
}
