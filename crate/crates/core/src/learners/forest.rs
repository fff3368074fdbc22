//! Random forest and balanced random forest.

use ndarray::ArrayView2;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{build_tree, DecisionTree, MaxFeatures, TreeConfig};
use super::{check_xy, single_class, Classifier};
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: MaxFeatures::Sqrt,
            min_samples_split: 2,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            max_features: self.max_features,
            min_samples_split: self.min_samples_split,
            max_depth: self.max_depth,
            seed: self.seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidInput("a forest needs at least one tree".into()));
        }
        Ok(())
    }
}

/// An ensemble scoring the mean of its trees' leaf fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<DecisionTree>,
}

impl Forest {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}

impl Classifier for Forest {
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let mut total = vec![0.0; x.nrows()];
        for t in &self.trees {
            for (acc, s) in total.iter_mut().zip(t.score(x)) {
                *acc += s;
            }
        }
        let m = self.trees.len() as f64;
        total.into_iter().map(|s| s / m).collect()
    }
}

fn grow<F>(x: ArrayView2<'_, f64>, y: &[u8], config: &ForestConfig, sample: F) -> Forest
where
    F: Fn(&mut Rng) -> Vec<usize> + Sync,
{
    let tree_config = config.tree_config();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive(config.seed, &[t as u64]));
            let rows = sample(&mut rng);
            build_tree(x, y, rows, &tree_config, &mut rng)
        })
        .collect();
    Forest { trees }
}

/// Bagged trees; each tree sees `n` rows drawn with replacement.
pub fn fit_forest(x: ArrayView2<'_, f64>, y: &[u8], config: &ForestConfig) -> Result<Forest> {
    check_xy(x, y)?;
    config.validate()?;
    let n = y.len();
    Ok(grow(x, y, config, |rng| {
        if config.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        }
    }))
}

/// Row indices for one balanced tree: a bootstrap of the smaller class plus
/// an equally sized draw, with replacement, from the larger class.
pub fn balanced_bootstrap(y: &[u8], rng: &mut Rng) -> Vec<usize> {
    let ones: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 1).collect();
    let zeros: Vec<usize> = (0..y.len()).filter(|&i| y[i] == 0).collect();
    let (small, large) = if ones.len() <= zeros.len() {
        (ones, zeros)
    } else {
        (zeros, ones)
    };
    let m = small.len();
    let mut rows: Vec<usize> = (0..m).map(|_| small[rng.random_range(0..m)]).collect();
    rows.extend((0..m).map(|_| large[rng.random_range(0..large.len())]));
    rows
}

/// Forest whose trees are trained on class-balanced bootstrap samples.
pub fn fit_balanced_forest(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    config: &ForestConfig,
) -> Result<Forest> {
    check_xy(x, y)?;
    config.validate()?;
    if let Some(only) = single_class(y) {
        return Err(Error::SingleClass(only));
    }
    Ok(grow(x, y, config, |rng| balanced_bootstrap(y, rng)))
}
