//! Random forest of Gini-split decision trees on bootstrap samples with
//! sqrt-of-features subsampling at every split. The anomaly score of a
//! point is the fraction of trees voting anomaly; leaf votes follow the
//! leaf majority with ties falling to normal.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        vote: u8,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    fn vote(&self, x: &[f64]) -> u8 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { vote } => return *vote,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ForestModel {
    pub(crate) trees: Vec<Tree>,
}

impl ForestModel {
    pub fn fit(x: &ArrayView2<f64>, y: &[u8], params: &ForestParams) -> ForestModel {
        let n = x.nrows();
        let d = x.ncols();
        let mtry = ((d as f64).sqrt().floor() as usize).max(1);
        let min_leaf = params.min_leaf.max(1);

        let trees = (0..params.n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[4, t as u64]));
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut tree = Tree { nodes: Vec::new() };
                grow(x, y, &rows, mtry, min_leaf, &mut rng, &mut tree.nodes);
                tree
            })
            .collect();
        ForestModel { trees }
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let votes: usize = self.trees.iter().map(|t| usize::from(t.vote(x))).sum();
        votes as f64 / self.trees.len() as f64
    }
}

fn leaf_vote(y: &[u8], rows: &[usize]) -> u8 {
    let pos = rows.iter().filter(|&&r| y[r] == 1).count();
    u8::from(pos * 2 > rows.len())
}

/// Best Gini split of `rows` on `feature`: returns (threshold, impurity).
fn best_split_on(
    x: &ArrayView2<f64>,
    y: &[u8],
    rows: &[usize],
    feature: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let mut values: Vec<(f64, u8)> = rows.iter().map(|&r| (x[[r, feature]], y[r])).collect();
    values.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total = values.len();
    let total_pos: usize = values.iter().filter(|(_, l)| *l == 1).count();

    let mut best: Option<(f64, f64)> = None;
    let mut left_pos = 0usize;
    for i in 0..total - 1 {
        if values[i].1 == 1 {
            left_pos += 1;
        }
        if values[i].0 == values[i + 1].0 {
            continue; // cannot split between equal values
        }
        let left_n = i + 1;
        let right_n = total - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let right_pos = total_pos - left_pos;
        let gini = |n_: usize, pos: usize| {
            let p = pos as f64 / n_ as f64;
            2.0 * p * (1.0 - p)
        };
        let impurity = (left_n as f64 * gini(left_n, left_pos)
            + right_n as f64 * gini(right_n, right_pos))
            / total as f64;
        let threshold = 0.5 * (values[i].0 + values[i + 1].0);
        if best.map_or(true, |(_, bi)| impurity < bi) {
            best = Some((threshold, impurity));
        }
    }
    best
}

fn grow(
    x: &ArrayView2<f64>,
    y: &[u8],
    rows: &[usize],
    mtry: usize,
    min_leaf: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let idx = nodes.len();
    let pos = rows.iter().filter(|&&r| y[r] == 1).count();
    if pos == 0 || pos == rows.len() || rows.len() < 2 * min_leaf {
        nodes.push(Node::Leaf {
            vote: leaf_vote(y, rows),
        });
        return idx;
    }

    let d = x.ncols();
    let mut best: Option<(usize, f64, f64)> = None;
    for feature in sample(rng, d, mtry.min(d)).into_iter() {
        if let Some((threshold, impurity)) = best_split_on(x, y, rows, feature, min_leaf) {
            if best.map_or(true, |(_, _, bi)| impurity < bi) {
                best = Some((feature, threshold, impurity));
            }
        }
    }

    match best {
        None => {
            nodes.push(Node::Leaf {
                vote: leaf_vote(y, rows),
            });
            idx
        }
        Some((feature, threshold, _)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| x[[r, feature]] <= threshold);
            nodes.push(Node::Leaf { vote: 0 }); // placeholder
            let left = grow(x, y, &left_rows, mtry, min_leaf, rng, nodes);
            let right = grow(x, y, &right_rows, mtry, min_leaf, rng, nodes);
            nodes[idx] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            idx
        }
    }
}

/// Flat node encoding used by the text model format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SerializedNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        vote: u8,
    },
}

pub fn forest_nodes(model: &ForestModel) -> Vec<Vec<SerializedNode>> {
    model
        .trees
        .iter()
        .map(|tree| {
            tree.nodes
                .iter()
                .map(|node| match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => SerializedNode::Split {
                        feature: *feature,
                        threshold: *threshold,
                        left: *left,
                        right: *right,
                    },
                    Node::Leaf { vote } => SerializedNode::Leaf { vote: *vote },
                })
                .collect()
        })
        .collect()
}

pub fn forest_from_nodes(trees: Vec<Vec<SerializedNode>>) -> crate::error::Result<ForestModel> {
    let mut out = Vec::with_capacity(trees.len());
    for nodes in trees {
        let count = nodes.len();
        if count == 0 {
            return Err(crate::error::ProteusError::ModelFormat(
                "empty tree".into(),
            ));
        }
        let nodes: Vec<Node> = nodes
            .into_iter()
            .map(|n| match n {
                SerializedNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if left >= count || right >= count {
                        return Err(crate::error::ProteusError::ModelFormat(
                            "tree child index out of range".into(),
                        ));
                    }
                    Ok(Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    })
                }
                SerializedNode::Leaf { vote } => Ok(Node::Leaf {
                    vote: u8::from(vote != 0),
                }),
            })
            .collect::<crate::error::Result<_>>()?;
        out.push(Tree { nodes });
    }
    Ok(ForestModel { trees: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn two_blobs(seed: u64, n_per: usize) -> (Array2<f64>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n_per {
            values.push(rng.gen_range(-1.0..1.0));
            values.push(rng.gen_range(-1.0..1.0));
            labels.push(0);
        }
        for _ in 0..n_per / 4 {
            values.push(rng.gen_range(3.0..5.0));
            values.push(rng.gen_range(3.0..5.0));
            labels.push(1);
        }
        (
            Array2::from_shape_vec((n_per + n_per / 4, 2), values).unwrap(),
            labels,
        )
    }

    #[test]
    fn separable_blobs_classify_cleanly() {
        let (x, y) = two_blobs(3, 80);
        let model = ForestModel::fit(
            &x.view(),
            &y,
            &ForestParams {
                n_trees: 50,
                min_leaf: 1,
                seed: 5,
            },
        );
        assert!(model.score(&[4.0, 4.0]) > 0.9);
        assert!(model.score(&[0.0, 0.0]) < 0.1);
    }

    #[test]
    fn unanimous_normal_vote_scores_zero() {
        let (x, y) = two_blobs(4, 60);
        let model = ForestModel::fit(
            &x.view(),
            &y,
            &ForestParams {
                n_trees: 25,
                min_leaf: 2,
                seed: 6,
            },
        );
        assert_eq!(model.score(&[-0.5, -0.5]), 0.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = two_blobs(5, 50);
        let params = ForestParams {
            n_trees: 30,
            min_leaf: 1,
            seed: 11,
        };
        let a = ForestModel::fit(&x.view(), &y, &params);
        let b = ForestModel::fit(&x.view(), &y, &params);
        for i in 0..x.nrows() {
            let row = x.row(i).to_vec();
            assert_eq!(a.score(&row), b.score(&row));
        }
    }

    #[test]
    fn min_leaf_limits_overfitting_depth() {
        let (x, y) = two_blobs(6, 40);
        let coarse = ForestModel::fit(
            &x.view(),
            &y,
            &ForestParams {
                n_trees: 10,
                min_leaf: 20,
                seed: 2,
            },
        );
        // with huge leaves the forest cannot be perfectly confident
        let s = coarse.score(&[4.0, 4.0]);
        assert!(s > 0.3, "score {s}");
    }
}
