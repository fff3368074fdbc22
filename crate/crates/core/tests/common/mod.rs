//! Independent reference implementations used by the integration tests.
//! Each one follows the textbook definition directly and favours clarity
//! over speed.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use icll_core::data::{load_path, Dataset};
use icll_core::hcluster::LinkageTree;
use icll_core::layering::Group;
use icll_core::seed;
use ndarray::Array2;
use rand::Rng;

pub fn keel_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/keel")
}

pub fn keel_paths() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(keel_dir())
        .expect("bundled data directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "dat"))
        .collect();
    paths.sort();
    paths
}

pub fn keel_datasets() -> Vec<Dataset> {
    keel_paths()
        .iter()
        .map(|p| load_path(p, "class").expect("bundled dataset parses"))
        .collect()
}

/// Number of data lines in a KEEL file: non-blank lines after `@data`
/// that are not `%` comments.
pub fn keel_data_lines(text: &str) -> usize {
    let mut in_data = false;
    let mut count = 0;
    for line in text.lines() {
        let t = line.trim();
        if in_data {
            if !t.is_empty() && !t.starts_with('%') {
                count += 1;
            }
        } else if t.to_ascii_lowercase().starts_with("@data") {
            in_data = true;
        }
    }
    count
}

/// Uniform points in `[-scale, scale]^p`.
pub fn random_points(rng: &mut seed::Rng, n: usize, p: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.random_range(-scale..scale))
}

/// Random binary labels with at least one of each class (needs `n >= 2`).
pub fn random_labels(rng: &mut seed::Rng, n: usize, p_minority: f64) -> Vec<u8> {
    loop {
        let y: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(p_minority))).collect();
        if y.contains(&0) && y.contains(&1) {
            return y;
        }
    }
}

pub fn dataset(x: Array2<f64>, y: Vec<u8>) -> Dataset {
    let p = x.ncols();
    let names = (0..p).map(|j| format!("x{j}")).collect();
    Dataset::new("synthetic", x, y, names).unwrap()
}

fn sse(x: &Array2<f64>, members: &[usize]) -> f64 {
    let p = x.ncols();
    let m = members.len() as f64;
    let mut total = 0.0;
    for j in 0..p {
        let mean = members.iter().map(|&i| x[[i, j]]).sum::<f64>() / m;
        total += members.iter().map(|&i| (x[[i, j]] - mean).powi(2)).sum::<f64>();
    }
    total
}

/// Ward merge heights by exhaustive search: at every step merge the pair of
/// clusters whose union increases the total within-cluster sum of squares
/// the least, recording `sqrt(2 * increase)`.
pub fn brute_force_ward_heights(x: &Array2<f64>) -> Vec<f64> {
    let mut clusters: Vec<Vec<usize>> = (0..x.nrows()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut union = clusters[a].clone();
                union.extend(&clusters[b]);
                let delta = sse(x, &union) - sse(x, &clusters[a]) - sse(x, &clusters[b]);
                if delta < best.0 {
                    best = (delta, a, b);
                }
            }
        }
        let (delta, a, b) = best;
        heights.push((2.0 * delta.max(0.0)).sqrt());
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
    }
    heights
}

/// Mean and population standard deviation of `ln(h)` over positive heights,
/// via Welford's online update.
pub fn log_height_stats(heights: &[f64]) -> Option<(f64, f64)> {
    let mut count = 0.0;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for &h in heights.iter().filter(|h| **h > 0.0) {
        let v = h.ln();
        count += 1.0;
        let delta = v - mean;
        mean += delta / count;
        m2 += delta * (v - mean);
    }
    (count > 0.0).then(|| (mean, (m2 / count).sqrt()))
}

/// Leaf set and maximum merge height of every internal node.
fn subtrees(tree: &LinkageTree) -> Vec<(BTreeSet<usize>, f64)> {
    let n = tree.n_leaves();
    let mut out: Vec<(BTreeSet<usize>, f64)> = Vec::new();
    for m in tree.merges() {
        let mut leaves = BTreeSet::new();
        let mut max_h = m.height;
        for c in [m.left, m.right] {
            if c < n {
                leaves.insert(c);
            } else {
                leaves.extend(out[c - n].0.iter().copied());
                max_h = max_h.max(out[c - n].1);
            }
        }
        out.push((leaves, max_h));
    }
    out
}

/// Flat clusters by enumerating every subtree: a leaf joins the largest
/// subtree containing it whose merges all have `ln(height) <= tau`.
/// Returns a canonical partition (sorted member lists, sorted).
pub fn enumerate_flat_clusters(tree: &LinkageTree, tau: f64) -> Vec<Vec<usize>> {
    let n = tree.n_leaves();
    let all = subtrees(tree);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for leaf in 0..n {
        let best = all
            .iter()
            .filter(|(leaves, max_h)| leaves.contains(&leaf) && max_h.ln() <= tau)
            .max_by_key(|(leaves, _)| leaves.len());
        let block: Vec<usize> = match best {
            Some((leaves, _)) => leaves.iter().copied().collect(),
            None => vec![leaf],
        };
        if !blocks.contains(&block) {
            blocks.push(block);
        }
    }
    blocks.sort();
    blocks
}

pub fn canonical_partition(cluster_of: &[usize]) -> Vec<Vec<usize>> {
    let k = cluster_of.iter().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); k];
    for (i, &c) in cluster_of.iter().enumerate() {
        blocks[c].push(i);
    }
    blocks.retain(|b| !b.is_empty());
    blocks.sort();
    blocks
}

/// Group of instance `i` from a direct scan of every row sharing its cluster.
pub fn group_of_instance(i: usize, labels: &[u8], cluster_of: &[usize]) -> Group {
    let mates = (0..labels.len()).filter(|&j| cluster_of[j] == cluster_of[i]);
    let (mut majority, mut minority) = (false, false);
    for j in mates {
        if labels[j] == 1 {
            minority = true;
        } else {
            majority = true;
        }
    }
    match (majority, minority) {
        (true, false) => Group::PureMajority,
        (false, true) => Group::PureMinority,
        _ => Group::Mixed,
    }
}

/// AUC as the share of (positive, negative) pairs ranked correctly, with
/// ties counted as one half.
pub fn pair_counting_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut favourable = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        if yi != 1 {
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                favourable += 1.0;
            } else if scores[i] == scores[j] {
                favourable += 0.5;
            }
        }
    }
    favourable / pairs
}

fn dist2(x: &Array2<f64>, i: usize, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(x.row(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Tomek links by definition: a cross-class pair where neither row has any
/// other row strictly closer than its partner.
pub fn tomek_oracle(x: &Array2<f64>, labels: &[u8]) -> Vec<(usize, usize)> {
    let n = x.nrows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if labels[i] == labels[j] {
                continue;
            }
            let dij = dist2(x, i, j);
            let closer = (0..n).any(|k| {
                (k != i && k != j) && (dist2(x, i, k) < dij || dist2(x, j, k) < dij)
            });
            if !closer {
                out.push((i, j));
            }
        }
    }
    out
}

/// The `k` nearest rows of `query` within `pool` (excluding `query`),
/// ties broken by index.
pub fn k_nearest_oracle(x: &Array2<f64>, query: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let mut cand: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&j| j != query)
        .map(|&j| (dist2(x, query, j), j))
        .collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    cand.into_iter().take(k).map(|c| c.1).collect()
}

/// Central finite-difference gradient with step `1e-5 * max(1, |theta_i|)`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, theta: &[f64]) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let h = 1e-5 * theta[i].abs().max(1.0);
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

/// `||a - b|| / max(||b||, 1e-12)` in the Euclidean norm.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / norm.max(1e-12)
}
