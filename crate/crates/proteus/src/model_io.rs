//! Versioned plain-text serialization of surrogate models.
//!
//! The format is line-oriented decimal text behind the magic header
//! `PROTEUS-MODEL v1`: scaler statistics, the selected feature subset
//! with names, then the classifier kind, parameters, and learned state.
//! Floats print in Rust's shortest round-trip form, so save → load is
//! exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::classify::{
    Classifier, ClassifierConfig, KnnModel, SurrogateModel, SvmModel,
};
use crate::classify::{forest_from_nodes, forest_nodes, SerializedNode};
use crate::data::StandardScaler;
use crate::error::{ProteusError, Result};

const MAGIC: &str = "PROTEUS-MODEL v1";

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_model(model: &SurrogateModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "dimension {}", model.input_dimension());
    let _ = writeln!(out, "scaler_means {}", join_floats(model.scaler.means()));
    let _ = writeln!(out, "scaler_stds {}", join_floats(model.scaler.std_devs()));
    let _ = writeln!(out, "features {}", model.selected_features.len());
    for (idx, name) in model.selected_features.iter().zip(&model.feature_names) {
        let _ = writeln!(out, "{idx} {name}");
    }
    match (&model.config, &model.classifier) {
        (ClassifierConfig::Knn { k }, Classifier::Knn(knn)) => {
            let _ = writeln!(out, "classifier knn k={k}");
            let _ = writeln!(out, "rows {}", knn.rows.len());
            for (row, label) in knn.rows.iter().zip(&knn.labels) {
                let _ = writeln!(out, "{label} {}", join_floats(row));
            }
        }
        (ClassifierConfig::RandomForest { n_trees, min_leaf }, Classifier::Forest(forest)) => {
            let _ = writeln!(out, "classifier rf n_trees={n_trees} min_leaf={min_leaf}");
            let trees = forest_nodes(forest);
            let _ = writeln!(out, "trees {}", trees.len());
            for nodes in trees {
                let _ = writeln!(out, "tree {}", nodes.len());
                for node in nodes {
                    match node {
                        SerializedNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            let _ = writeln!(out, "split {feature} {threshold} {left} {right}");
                        }
                        SerializedNode::Leaf { vote } => {
                            let _ = writeln!(out, "leaf {vote}");
                        }
                    }
                }
            }
        }
        (ClassifierConfig::LinearSvm { c }, Classifier::Svm(svm)) => {
            let _ = writeln!(out, "classifier svm C={c}");
            let _ = writeln!(out, "weights {}", join_floats(&svm.weights));
            let _ = writeln!(out, "bias {}", svm.bias);
        }
        _ => unreachable!("classifier configuration and state always agree"),
    }
    out.push_str("end\n");
    out
}

pub fn save_model(model: &SurrogateModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), write_model(model))
        .map_err(|e| ProteusError::io(path.as_ref(), e))
}

struct Lines<'a> {
    lines: std::str::Lines<'a>,
    number: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.number += 1;
        self.lines
            .next()
            .ok_or_else(|| ProteusError::ModelFormat(format!("unexpected end at line {}", self.number)))
    }
}

fn bad(line_no: usize, what: &str) -> ProteusError {
    ProteusError::ModelFormat(format!("line {line_no}: {what}"))
}

fn parse_floats(s: &str, line_no: usize) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| bad(line_no, &format!("bad float \"{t}\"")))
        })
        .collect()
}

fn expect_prefix<'a>(line: &'a str, prefix: &str, line_no: usize) -> Result<&'a str> {
    line.strip_prefix(prefix)
        .ok_or_else(|| bad(line_no, &format!("expected \"{prefix}…\", got \"{line}\"")))
}

pub fn read_model(text: &str) -> Result<SurrogateModel> {
    let mut lines = Lines {
        lines: text.lines(),
        number: 0,
    };
    if lines.next()? != MAGIC {
        return Err(ProteusError::ModelFormat(format!(
            "missing magic header \"{MAGIC}\""
        )));
    }

    let dim_line = lines.next()?;
    let dimension: usize = expect_prefix(dim_line, "dimension ", lines.number)?
        .trim()
        .parse()
        .map_err(|_| bad(lines.number, "bad dimension"))?;

    let means_line = lines.next()?;
    let means = parse_floats(expect_prefix(means_line, "scaler_means ", lines.number)?, lines.number)?;
    let stds_line = lines.next()?;
    let stds = parse_floats(expect_prefix(stds_line, "scaler_stds ", lines.number)?, lines.number)?;
    if means.len() != dimension || stds.len() != dimension {
        return Err(bad(lines.number, "scaler width does not match dimension"));
    }
    let scaler = StandardScaler::from_parts(means, stds)?;

    let nfeat_line = lines.next()?;
    let n_features: usize = expect_prefix(nfeat_line, "features ", lines.number)?
        .trim()
        .parse()
        .map_err(|_| bad(lines.number, "bad feature count"))?;
    let mut selected_features = Vec::with_capacity(n_features);
    let mut feature_names = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        let line = lines.next()?;
        let (idx, name) = line
            .split_once(' ')
            .ok_or_else(|| bad(lines.number, "expected \"<index> <name>\""))?;
        let idx: usize = idx.parse().map_err(|_| bad(lines.number, "bad feature index"))?;
        if idx >= dimension {
            return Err(bad(lines.number, "feature index out of range"));
        }
        selected_features.push(idx);
        feature_names.push(name.to_string());
    }

    let header = lines.next()?;
    let rest = expect_prefix(header, "classifier ", lines.number)?;
    let header_line = lines.number;
    let mut parts = rest.split_whitespace();
    let kind = parts.next().ok_or_else(|| bad(header_line, "missing classifier kind"))?;
    let mut params = std::collections::HashMap::new();
    for p in parts {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| bad(header_line, "expected key=value parameter"))?;
        params.insert(k.to_string(), v.to_string());
    }
    let param = |name: &str| -> Result<String> {
        params
            .get(name)
            .cloned()
            .ok_or_else(|| bad(header_line, &format!("missing parameter {name}")))
    };

    let (config, classifier) = match kind {
        "knn" => {
            let k: usize = param("k")?.parse().map_err(|_| bad(header_line, "bad k"))?;
            let rows_line = lines.next()?;
            let n_rows: usize = expect_prefix(rows_line, "rows ", lines.number)?
                .trim()
                .parse()
                .map_err(|_| bad(lines.number, "bad row count"))?;
            let mut rows = Vec::with_capacity(n_rows);
            let mut labels = Vec::with_capacity(n_rows);
            for _ in 0..n_rows {
                let line = lines.next()?;
                let mut values = parse_floats(line, lines.number)?;
                if values.is_empty() {
                    return Err(bad(lines.number, "empty training row"));
                }
                let label = values.remove(0);
                if values.len() != n_features {
                    return Err(bad(lines.number, "training row width mismatch"));
                }
                labels.push(u8::from(label != 0.0));
                rows.push(values);
            }
            (
                ClassifierConfig::Knn { k },
                Classifier::Knn(KnnModel { rows, labels, k }),
            )
        }
        "rf" => {
            let n_trees: usize = param("n_trees")?
                .parse()
                .map_err(|_| bad(header_line, "bad n_trees"))?;
            let min_leaf: usize = param("min_leaf")?
                .parse()
                .map_err(|_| bad(header_line, "bad min_leaf"))?;
            let trees_line = lines.next()?;
            let tree_count: usize = expect_prefix(trees_line, "trees ", lines.number)?
                .trim()
                .parse()
                .map_err(|_| bad(lines.number, "bad tree count"))?;
            let mut trees = Vec::with_capacity(tree_count);
            for _ in 0..tree_count {
                let tree_line = lines.next()?;
                let node_count: usize = expect_prefix(tree_line, "tree ", lines.number)?
                    .trim()
                    .parse()
                    .map_err(|_| bad(lines.number, "bad node count"))?;
                let mut nodes = Vec::with_capacity(node_count);
                for _ in 0..node_count {
                    let line = lines.next()?;
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    match tokens.as_slice() {
                        ["split", feature, threshold, left, right] => {
                            nodes.push(SerializedNode::Split {
                                feature: feature
                                    .parse()
                                    .map_err(|_| bad(lines.number, "bad feature"))?,
                                threshold: threshold
                                    .parse()
                                    .map_err(|_| bad(lines.number, "bad threshold"))?,
                                left: left.parse().map_err(|_| bad(lines.number, "bad left"))?,
                                right: right
                                    .parse()
                                    .map_err(|_| bad(lines.number, "bad right"))?,
                            });
                        }
                        ["leaf", vote] => nodes.push(SerializedNode::Leaf {
                            vote: vote.parse().map_err(|_| bad(lines.number, "bad vote"))?,
                        }),
                        _ => return Err(bad(lines.number, "bad tree node")),
                    }
                }
                trees.push(nodes);
            }
            (
                ClassifierConfig::RandomForest { n_trees, min_leaf },
                Classifier::Forest(forest_from_nodes(trees)?),
            )
        }
        "svm" => {
            let c: f64 = param("C")?.parse().map_err(|_| bad(header_line, "bad C"))?;
            let weights_line = lines.next()?;
            let weights = parse_floats(
                expect_prefix(weights_line, "weights ", lines.number)?,
                lines.number,
            )?;
            if weights.len() != n_features {
                return Err(bad(lines.number, "weight width mismatch"));
            }
            let bias_line = lines.next()?;
            let bias: f64 = expect_prefix(bias_line, "bias ", lines.number)?
                .trim()
                .parse()
                .map_err(|_| bad(lines.number, "bad bias"))?;
            (
                ClassifierConfig::LinearSvm { c },
                Classifier::Svm(SvmModel {
                    weights,
                    bias,
                    objective_trace: Vec::new(),
                }),
            )
        }
        other => {
            return Err(bad(
                header_line,
                &format!("unknown classifier kind \"{other}\""),
            ))
        }
    };

    if lines.next()? != "end" {
        return Err(ProteusError::ModelFormat("missing end marker".into()));
    }

    Ok(SurrogateModel {
        config,
        selected_features,
        feature_names,
        scaler,
        classifier,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SurrogateModel> {
    let text =
        std::fs::read_to_string(path.as_ref()).map_err(|e| ProteusError::io(path.as_ref(), e))?;
    read_model(&text)
}
