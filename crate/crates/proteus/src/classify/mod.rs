//! Surrogate classifiers with anomaly-score outputs in [0, 1].

mod forest;
mod knn;
mod svm;

pub use forest::{forest_from_nodes, forest_nodes, ForestModel, ForestParams, SerializedNode};
pub use knn::KnnModel;
pub use svm::SvmModel;

use ndarray::{Array2, ArrayView2};

use crate::data::StandardScaler;
use crate::error::{ProteusError, Result};

/// Classifier algorithm plus hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierConfig {
    Knn { k: usize },
    RandomForest { n_trees: usize, min_leaf: usize },
    LinearSvm { c: f64 },
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierConfig::Knn { k } if *k < 1 || *k % 2 == 0 => Err(
                ProteusError::InvalidParameter(format!("knn k must be odd and >= 1, got {k}")),
            ),
            ClassifierConfig::RandomForest { n_trees, min_leaf } if *n_trees < 1 || *min_leaf < 1 => {
                Err(ProteusError::InvalidParameter(
                    "random forest needs n_trees >= 1 and min_leaf >= 1".into(),
                ))
            }
            ClassifierConfig::LinearSvm { c } if !(*c > 0.0) => Err(
                ProteusError::InvalidParameter(format!("svm C must be > 0, got {c}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ClassifierConfig::Knn { k } => format!("knn(k={k})"),
            ClassifierConfig::RandomForest { n_trees, min_leaf } => {
                format!("rf(trees={n_trees},min_leaf={min_leaf})")
            }
            ClassifierConfig::LinearSvm { c } => format!("svm(C={c})"),
        }
    }
}

/// A fitted classifier. Scores are anomaly probabilities in [0, 1];
/// higher means more anomalous.
#[derive(Debug, Clone)]
pub enum Classifier {
    Knn(KnnModel),
    Forest(ForestModel),
    Svm(SvmModel),
}

impl Classifier {
    /// Fit on rows already restricted to the selected features. `y` must
    /// contain both classes.
    pub fn fit(
        config: &ClassifierConfig,
        x: &ArrayView2<f64>,
        y: &[u8],
        seed: u64,
    ) -> Result<Classifier> {
        config.validate()?;
        if x.nrows() != y.len() {
            return Err(ProteusError::InvalidData(
                "classifier features/targets length mismatch".into(),
            ));
        }
        if !y.contains(&1) || !y.contains(&0) {
            return Err(ProteusError::InvalidData(
                "classifier training targets are single-class".into(),
            ));
        }
        Ok(match config {
            ClassifierConfig::Knn { k } => Classifier::Knn(KnnModel::fit(x, y, *k)),
            ClassifierConfig::RandomForest { n_trees, min_leaf } => Classifier::Forest(
                ForestModel::fit(
                    x,
                    y,
                    &ForestParams {
                        n_trees: *n_trees,
                        min_leaf: *min_leaf,
                        seed,
                    },
                ),
            ),
            ClassifierConfig::LinearSvm { c } => Classifier::Svm(SvmModel::fit(x, y, *c)),
        })
    }

    /// Score a point given in the classifier's own (projected) space.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Classifier::Knn(m) => m.score(x),
            Classifier::Forest(m) => m.score(x),
            Classifier::Svm(m) => m.score(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.score(x) > 0.5)
    }
}

/// The final deliverable model: a scaler from the caller's raw feature
/// space, the explaining feature subset, and the classifier fitted on
/// that subset. Consumes full-dimensionality rows and projects
/// internally.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    pub config: ClassifierConfig,
    pub selected_features: Vec<usize>,
    pub feature_names: Vec<String>,
    pub scaler: StandardScaler,
    pub classifier: Classifier,
}

impl SurrogateModel {
    pub fn input_dimension(&self) -> usize {
        self.scaler.dimension()
    }

    pub fn score(&self, x_full: &[f64]) -> Result<f64> {
        let z = self.scaler.transform_row(x_full)?;
        let projected: Vec<f64> = self.selected_features.iter().map(|&j| z[j]).collect();
        Ok(self.classifier.score(&projected))
    }

    pub fn predict(&self, x_full: &[f64]) -> Result<u8> {
        Ok(u8::from(self.score(x_full)? > 0.5))
    }

    pub fn score_rows(&self, rows: &ArrayView2<f64>) -> Result<Vec<f64>> {
        (0..rows.nrows())
            .map(|i| self.score(&rows.row(i).to_vec()))
            .collect()
    }
}

/// Gather the given columns of a matrix into a dense row-major copy.
pub fn project_columns(x: &ArrayView2<f64>, columns: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), columns.len()));
    for (c, &j) in columns.iter().enumerate() {
        out.column_mut(c).assign(&x.column(j));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn predict_is_strictly_above_half() {
        let model = Classifier::Svm(SvmModel {
            weights: vec![1.0],
            bias: 0.0,
            objective_trace: vec![],
        });
        assert_eq!(model.predict(&[1.0]), 1); // score ≈ 0.73
        assert_eq!(model.predict(&[0.0]), 0); // score = 0.5 exactly
        assert_eq!(model.predict(&[-2.0]), 0); // score ≈ 0.12
    }

    #[test]
    fn single_class_targets_rejected() {
        let x = arr2(&[[0.0], [1.0]]);
        assert!(Classifier::fit(&ClassifierConfig::Knn { k: 1 }, &x.view(), &[1, 1], 0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ClassifierConfig::Knn { k: 4 }.validate().is_err());
        assert!(ClassifierConfig::Knn { k: 3 }.validate().is_ok());
        assert!(ClassifierConfig::LinearSvm { c: 0.0 }.validate().is_err());
        assert!(ClassifierConfig::RandomForest {
            n_trees: 0,
            min_leaf: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn surrogate_projects_and_scales() {
        // scaler shifts by 10 on feature 0 only; feature 1 is ignored
        let scaler = StandardScaler::from_parts(vec![10.0, 0.0], vec![1.0, 1.0]).unwrap();
        let x = arr2(&[[-1.0], [1.0], [-0.8], [0.9]]);
        let y = [0, 1, 0, 1];
        let classifier = Classifier::fit(&ClassifierConfig::Knn { k: 1 }, &x.view(), &y, 0).unwrap();
        let surrogate = SurrogateModel {
            config: ClassifierConfig::Knn { k: 1 },
            selected_features: vec![0],
            feature_names: vec!["a".into()],
            scaler,
            classifier,
        };
        assert_eq!(surrogate.predict(&[11.0, 99.0]).unwrap(), 1);
        assert_eq!(surrogate.predict(&[9.0, 99.0]).unwrap(), 0);
        assert!(surrogate.score(&[11.0]).is_err()); // dimension mismatch
    }

    #[test]
    fn project_columns_gathers_in_order() {
        let x = arr2(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let p = project_columns(&x.view(), &[2, 0]);
        assert_eq!(p, arr2(&[[3.0, 1.0], [6.0, 4.0]]));
    }
}
