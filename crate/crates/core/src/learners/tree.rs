//! CART classification tree with Gini splits.

use std::cmp::Ordering;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_xy, Classifier};
use crate::error::Result;
use crate::seed::{self, Rng};

/// Number of candidate features drawn at each split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MaxFeatures {
    /// `floor(sqrt(p))`, at least 1.
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (p as f64).sqrt().floor() as usize,
            MaxFeatures::All => p,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    /// Only used to draw feature subsets when `max_features < p`.
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_features: MaxFeatures::All,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        score: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn score_row(&self, row: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { score } => return score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row(feature) <= threshold { left } else { right },
            }
        }
    }
}

impl Classifier for DecisionTree {
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|r| self.score_row(|f| r[f]))
            .collect()
    }
}

/// Fits a tree on all rows.
pub fn fit_tree(x: ArrayView2<'_, f64>, y: &[u8], config: &TreeConfig) -> Result<DecisionTree> {
    check_xy(x, y)?;
    let mut rng = seed::rng(config.seed);
    Ok(build_tree(x, y, (0..y.len()).collect(), config, &mut rng))
}

/// Candidate split, compared by impurity score, then feature, then threshold.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    /// Numerator and denominator of `sum_children (pos^2 + neg^2) / n_child`,
    /// kept as integers so equal-impurity splits compare exactly.
    num: u128,
    den: u128,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        // Larger num/den means lower weighted Gini impurity.
        match (self.num * other.den).cmp(&(other.num * self.den)) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.feature, self.threshold) < (other.feature, other.threshold),
        }
    }
}

fn best_split_on_feature(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    samples: &[usize],
    feature: usize,
    buf: &mut Vec<(f64, u8)>,
) -> Option<Candidate> {
    buf.clear();
    buf.extend(samples.iter().map(|&i| (x[[i, feature]], y[i])));
    buf.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = buf.len() as u64;
    let pos_total = buf.iter().filter(|p| p.1 == 1).count() as u64;
    let mut best: Option<Candidate> = None;
    let mut pos_left = 0u64;
    for i in 0..buf.len() - 1 {
        pos_left += u64::from(buf[i].1);
        let (lo, hi) = (buf[i].0, buf[i + 1].0);
        if lo == hi {
            continue;
        }
        let n_left = i as u64 + 1;
        let n_right = n - n_left;
        let neg_left = n_left - pos_left;
        let pos_right = pos_total - pos_left;
        let neg_right = n_right - pos_right;
        let q_left = u128::from(pos_left * pos_left + neg_left * neg_left);
        let q_right = u128::from(pos_right * pos_right + neg_right * neg_right);
        let mid = lo + (hi - lo) / 2.0;
        let threshold = if mid < hi { mid } else { lo };
        let cand = Candidate {
            num: q_left * u128::from(n_right) + q_right * u128::from(n_left),
            den: u128::from(n_left) * u128::from(n_right),
            feature,
            threshold,
        };
        // Thresholds ascend, so an equal score never replaces the incumbent.
        if best.is_none_or(|b| cand.num * b.den > b.num * cand.den) {
            best = Some(cand);
        }
    }
    best
}

/// Grows a tree on `samples` (indices into `x`, duplicates allowed).
pub(crate) fn build_tree(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    mut samples: Vec<usize>,
    config: &TreeConfig,
    rng: &mut Rng,
) -> DecisionTree {
    let p = x.ncols();
    let max_features = config.max_features.resolve(p);
    let mut nodes: Vec<Node> = vec![Node::Leaf { score: 0.0 }];
    let mut stack = vec![(0usize, 0usize, samples.len(), 0usize)];
    let mut features: Vec<usize> = (0..p).collect();
    let mut buf = Vec::with_capacity(samples.len());

    while let Some((node, start, end, depth)) = stack.pop() {
        let idx = &mut samples[start..end];
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| y[i] == 1).count();
        let score = pos as f64 / n as f64;
        let pure = pos == 0 || pos == n;
        let depth_reached = config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || n < config.min_samples_split.max(2) {
            nodes[node] = Node::Leaf { score };
            continue;
        }

        let mut best: Option<Candidate> = None;
        if max_features < p {
            features.shuffle(rng);
        }
        for (visited, &f) in features.iter().enumerate() {
            // Keep drawing past `max_features` until some feature can split.
            if visited >= max_features && best.is_some() {
                break;
            }
            if let Some(c) = best_split_on_feature(x, y, idx, f, &mut buf) {
                if best.is_none_or(|b| c.better_than(&b)) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            nodes[node] = Node::Leaf { score };
            continue;
        };

        let mut mid = 0;
        for k in 0..n {
            if x[[idx[k], split.feature]] <= split.threshold {
                idx.swap(k, mid);
                mid += 1;
            }
        }
        let left = nodes.len();
        nodes.push(Node::Leaf { score: 0.0 });
        nodes.push(Node::Leaf { score: 0.0 });
        nodes[node] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right: left + 1,
        };
        stack.push((left + 1, start + mid, end, depth + 1));
        stack.push((left, start, start + mid, depth + 1));
    }
    DecisionTree {
        nodes,
        n_features: p,
    }
}
