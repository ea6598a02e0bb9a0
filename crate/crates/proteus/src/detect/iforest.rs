//! Isolation Forest: an ensemble of random-split trees built on
//! subsamples. Points that isolate in few splits are anomalous; the
//! score is 2^(−E[h(x)]/c(ψ)) with h the path length adjusted by c(size)
//! at truncated leaves, so scores live in (0, 1) and higher is more
//! anomalous.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ProteusError, Result};
use crate::seed::derive_seed;

const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Average unsuccessful-search path length in a binary search tree over
/// `n` points; the standard isolation-forest normalizer.
pub fn average_path_length(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let nf = n as f64;
            2.0 * ((nf - 1.0).ln() + EULER_MASCHERONI) - 2.0 * (nf - 1.0) / nf
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IsolationForestParams {
    pub n_trees: usize,
    pub subsample_size: usize,
    pub seed: u64,
}

impl Default for IsolationForestParams {
    fn default() -> Self {
        IsolationForestParams {
            n_trees: 100,
            subsample_size: 256,
            seed: 0,
        }
    }
}

#[derive(Debug)]
enum Node {
    Split {
        feature: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
    },
}

#[derive(Debug)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn path_length(&self, x: &[f64]) -> f64 {
        let mut node = 0;
        let mut depth = 0.0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { size } => return depth + average_path_length(*size),
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *value { *left } else { *right };
                    depth += 1.0;
                }
            }
        }
    }
}

#[derive(Debug)]
pub struct IsolationForest {
    trees: Vec<Tree>,
    normalizer: f64,
    dimension: usize,
}

impl IsolationForest {
    pub fn fit(data: &ArrayView2<f64>, params: &IsolationForestParams) -> Result<Self> {
        let (n, d) = data.dim();
        if d == 0 {
            return Err(ProteusError::InvalidData(
                "isolation forest needs at least one feature".into(),
            ));
        }
        if n < 2 {
            return Err(ProteusError::InvalidData(
                "isolation forest needs at least 2 samples".into(),
            ));
        }
        if params.n_trees < 1 || params.subsample_size < 2 {
            return Err(ProteusError::InvalidParameter(
                "n_trees >= 1 and subsample_size >= 2 required".into(),
            ));
        }

        let psi = params.subsample_size.min(n);
        let max_depth = (psi as f64).log2().ceil() as usize;
        let mut trees = Vec::with_capacity(params.n_trees);
        for t in 0..params.n_trees {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[1, t as u64]));
            let subsample: Vec<usize> = sample(&mut rng, n, psi).into_vec();
            let mut tree = Tree { nodes: Vec::new() };
            build_node(data, &subsample, 0, max_depth, &mut rng, &mut tree.nodes);
            trees.push(tree);
        }
        Ok(IsolationForest {
            trees,
            normalizer: average_path_length(psi),
            dimension: d,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let mean_path: f64 = self
            .trees
            .iter()
            .map(|t| t.path_length(x))
            .sum::<f64>()
            / self.trees.len() as f64;
        2f64.powf(-mean_path / self.normalizer)
    }
}

fn build_node(
    data: &ArrayView2<f64>,
    rows: &[usize],
    depth: usize,
    max_depth: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let idx = nodes.len();
    if rows.len() <= 1 || depth >= max_depth {
        nodes.push(Node::Leaf { size: rows.len() });
        return idx;
    }

    // features with spread at this node; constants cannot split
    let d = data.ncols();
    let mut candidates = Vec::with_capacity(d);
    for j in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in rows {
            let v = data[[r, j]];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi > lo {
            candidates.push((j, lo, hi));
        }
    }
    if candidates.is_empty() {
        nodes.push(Node::Leaf { size: rows.len() });
        return idx;
    }

    let (feature, lo, hi) = candidates[rng.gen_range(0..candidates.len())];
    let value = rng.gen_range(lo..hi);
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| data[[r, feature]] < value);

    nodes.push(Node::Leaf { size: 0 }); // placeholder until children exist
    let left = build_node(data, &left_rows, depth + 1, max_depth, rng, nodes);
    let right = build_node(data, &right_rows, depth + 1, max_depth, rng, nodes);
    nodes[idx] = Node::Split {
        feature,
        value,
        left,
        right,
    };
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn normalizer_matches_hand_evaluated_formula() {
        // c(256) = 2(ln 255 + gamma) - 2*255/256
        let expected = 2.0 * (255f64.ln() + 0.5772156649015329) - 2.0 * 255.0 / 256.0;
        assert_abs_diff_eq!(average_path_length(256), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(average_path_length(256), 10.2448, epsilon = 1e-4);
        assert_eq!(average_path_length(1), 0.0);
        assert_eq!(average_path_length(2), 1.0);
    }

    #[test]
    fn root_isolation_has_path_length_one() {
        let tree = Tree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    value: 0.5,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { size: 1 },
                Node::Leaf { size: 1 },
            ],
        };
        assert_eq!(tree.path_length(&[0.0]), 1.0);
        assert_eq!(tree.path_length(&[1.0]), 1.0);
    }

    #[test]
    fn far_point_gets_maximum_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200;
        let mut values = Vec::with_capacity(n * 2);
        for _ in 0..n - 1 {
            values.push(rng.gen_range(-0.5..0.5));
            values.push(rng.gen_range(-0.5..0.5));
        }
        values.push(50.0);
        values.push(50.0);
        let data = Array2::from_shape_vec((n, 2), values).unwrap();
        let forest = IsolationForest::fit(
            &data.view(),
            &IsolationForestParams {
                n_trees: 100,
                subsample_size: 64,
                seed: 3,
            },
        )
        .unwrap();
        let scores: Vec<f64> = (0..n).map(|i| forest.score(&data.row(i).to_vec())).collect();
        let max = scores.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(scores[n - 1], max);
        assert!(scores[n - 1] > 0.5);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = Array2::from_shape_fn((50, 3), |(i, j)| ((i * 7 + j * 13) % 17) as f64);
        let params = IsolationForestParams {
            n_trees: 20,
            subsample_size: 32,
            seed: 9,
        };
        let a = IsolationForest::fit(&data.view(), &params).unwrap();
        let b = IsolationForest::fit(&data.view(), &params).unwrap();
        for i in 0..50 {
            let row = data.row(i).to_vec();
            assert_eq!(a.score(&row), b.score(&row));
        }
    }
}
