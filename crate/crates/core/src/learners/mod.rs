//! Base classifiers producing scores in `[0, 1]`, read as `P(class = 1)`.
//!
//! [`LearnerSpec`] describes how to fit, [`Model`] is the fitted, serializable
//! result. Fitting any learner on single-class targets yields
//! [`Model::Constant`] at that class's value.

mod forest;
mod logistic;
mod tree;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use forest::{balanced_bootstrap, fit_balanced_forest, fit_forest, Forest, ForestConfig};
pub use logistic::{fit_logistic, LogisticConfig, LogisticModel, LogisticObjective};
pub use tree::{fit_tree, DecisionTree, MaxFeatures, Node, TreeConfig};

/// Anything that scores rows of a feature matrix.
pub trait Classifier {
    /// One score in `[0, 1]` per row.
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64>;

    /// Class 1 where the score reaches `threshold`.
    fn predict(&self, x: ArrayView2<'_, f64>, threshold: f64) -> Vec<u8> {
        self.score(x)
            .into_iter()
            .map(|s| u8::from(s >= threshold))
            .collect()
    }
}

/// A fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Constant(f64),
    Tree(DecisionTree),
    Forest(Forest),
    Logistic(LogisticModel),
}

impl Model {
    pub fn is_constant(&self) -> Option<f64> {
        match self {
            Model::Constant(v) => Some(*v),
            _ => None,
        }
    }
}

impl Classifier for Model {
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        match self {
            Model::Constant(v) => vec![*v; x.nrows()],
            Model::Tree(t) => t.score(x),
            Model::Forest(f) => f.score(x),
            Model::Logistic(l) => l.score(x),
        }
    }
}

/// Which learner to fit, with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerSpec {
    Tree(TreeConfig),
    Forest(ForestConfig),
    BalancedForest(ForestConfig),
    Logistic(LogisticConfig),
}

impl LearnerSpec {
    pub fn random_forest() -> Self {
        LearnerSpec::Forest(ForestConfig::default())
    }

    /// Fits on `(x, y)`; `seed` replaces any seed stored in the config.
    pub fn fit(&self, x: ArrayView2<'_, f64>, y: &[u8], seed: u64) -> Result<Model> {
        check_xy(x, y)?;
        if let Some(only) = single_class(y) {
            return Ok(Model::Constant(f64::from(only)));
        }
        Ok(match self {
            LearnerSpec::Tree(c) => Model::Tree(fit_tree(x, y, &TreeConfig { seed, ..c.clone() })?),
            LearnerSpec::Forest(c) => {
                Model::Forest(fit_forest(x, y, &ForestConfig { seed, ..c.clone() })?)
            }
            LearnerSpec::BalancedForest(c) => {
                Model::Forest(fit_balanced_forest(x, y, &ForestConfig { seed, ..c.clone() })?)
            }
            LearnerSpec::Logistic(c) => Model::Logistic(fit_logistic(x, y, c)?),
        })
    }
}

pub(crate) fn check_xy(x: ArrayView2<'_, f64>, y: &[u8]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::InvalidInput("cannot fit on zero rows".into()));
    }
    if x.nrows() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} targets",
            x.nrows(),
            y.len()
        )));
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::InvalidInput("targets must be 0 or 1".into()));
    }
    Ok(())
}

/// The class value if every target is the same.
pub(crate) fn single_class(y: &[u8]) -> Option<u8> {
    let first = *y.first()?;
    y.iter().all(|&v| v == first).then_some(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn single_class_gives_constant() {
        let x = Array2::from_shape_fn((6, 2), |(i, j)| (i * 3 + j) as f64);
        for spec in [
            LearnerSpec::random_forest(),
            LearnerSpec::Tree(TreeConfig::default()),
            LearnerSpec::Logistic(LogisticConfig::default()),
            LearnerSpec::BalancedForest(ForestConfig::default()),
        ] {
            assert_eq!(spec.fit(x.view(), &[0; 6], 1).unwrap(), Model::Constant(0.0));
            assert_eq!(spec.fit(x.view(), &[1; 6], 1).unwrap(), Model::Constant(1.0));
        }
        let m = Model::Constant(1.0);
        assert_eq!(m.score(x.view()), vec![1.0; 6]);
    }

    #[test]
    fn mismatched_shapes() {
        let x = Array2::<f64>::zeros((3, 1));
        assert!(LearnerSpec::random_forest().fit(x.view(), &[0, 1], 0).is_err());
        let empty = Array2::<f64>::zeros((0, 1));
        assert!(LearnerSpec::random_forest().fit(empty.view(), &[], 0).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 13) % 11) as f64 / 3.0);
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        for spec in [
            LearnerSpec::Forest(ForestConfig { n_trees: 5, ..Default::default() }),
            LearnerSpec::Logistic(LogisticConfig::default()),
        ] {
            let m = spec.fit(x.view(), &y, 3).unwrap();
            let back: Model = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
            assert_eq!(m, back);
            assert_eq!(m.score(x.view()), back.score(x.view()));
        }
    }
}
