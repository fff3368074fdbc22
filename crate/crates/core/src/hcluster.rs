//! Agglomerative Ward clustering with an automatic cut.
//!
//! The linkage tree is cut where the natural logarithm of the merge height
//! exceeds `tau = mu + sigma`, the mean plus the population standard
//! deviation of the logged merge heights. Zero heights (duplicate rows) are
//! left out of the statistics and always end up co-clustered.

use std::io::Write;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condensed upper-triangular matrix of pairwise distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + j - i - 1
}

impl DistanceMatrix {
    /// Wraps a condensed vector of length `n(n-1)/2`.
    pub fn from_condensed(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 || values.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "condensed matrix of length {} does not match n = {n}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidInput(
                "distances must be finite and non-negative".into(),
            ));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn condensed(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.values[condensed_index(self.n, j, i)],
        }
    }
}

/// Euclidean distances between all rows.
///
/// Rows are computed in parallel, each with a fixed left-to-right reduction,
/// so the result does not depend on the number of workers.
pub fn pairwise_euclidean(features: ArrayView2<'_, f64>) -> Result<DistanceMatrix> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rows to compute distances, got {n}"
        )));
    }
    for ((row, column), v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column });
        }
    }
    let rows: Vec<Vec<f64>> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let a = features.row(i);
            (i + 1..n)
                .map(|j| {
                    a.iter()
                        .zip(features.row(j))
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    Ok(DistanceMatrix {
        n,
        values: rows.concat(),
    })
}

/// One agglomeration step. Ids below `n` are leaves, `n + t` is the cluster
/// created at step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// The `n - 1` merges of an agglomerative clustering, in merge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageTree {
    n: usize,
    merges: Vec<Merge>,
}

impl LinkageTree {
    pub fn n_leaves(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Writes one `left right height size` line per merge.
    pub fn write_dendrogram<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for m in &self.merges {
            writeln!(w, "{} {} {} {}", m.left, m.right, m.height, m.size)?;
        }
        Ok(())
    }
}

/// Ward linkage via the Lance-Williams recurrence on squared distances.
///
/// Merging two singletons happens at their Euclidean distance; in general
/// the height is `sqrt(2 * increase in within-cluster SSE)`. Among equally
/// close pairs the one with the smallest `(slot_a, slot_b)` is merged, where a
/// cluster's slot is the smallest leaf index it contains.
pub fn ward_linkage(dist: &DistanceMatrix) -> LinkageTree {
    let n = dist.n;
    let mut d2: Vec<f64> = dist.values.iter().map(|d| d * d).collect();
    let at = |i: usize, j: usize| {
        if i < j {
            condensed_index(n, i, j)
        } else {
            condensed_index(n, j, i)
        }
    };

    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut id: Vec<usize> = (0..n).collect();
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let nearest = |k: usize, active: &[bool], d2: &[f64]| {
        let mut best = (f64::INFINITY, usize::MAX);
        for l in (0..n).filter(|&l| l != k && active[l]) {
            let d = d2[at(k, l)];
            if d < best.0 {
                best = (d, l);
            }
        }
        best
    };
    for k in 0..n {
        let (d, l) = nearest(k, &active, &d2);
        nn_d[k] = d;
        nn[k] = l;
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for k in (0..n).filter(|&k| active[k]) {
            let cand = (nn_d[k], k.min(nn[k]), k.max(nn[k]));
            let better = match best {
                None => true,
                Some(b) => cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2)),
            };
            if better {
                best = Some(cand);
            }
        }
        let (dab, a, b) = best.expect("at least two active clusters");

        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let nk = size[k] as f64;
            let updated = ((nk + na) * d2[at(k, a)] + (nk + nb) * d2[at(k, b)] - nk * dab)
                / (nk + na + nb);
            d2[at(k, a)] = updated.max(0.0);
        }

        let (left, right) = (id[a].min(id[b]), id[a].max(id[b]));
        size[a] += size[b];
        merges.push(Merge {
            left,
            right,
            height: dab.sqrt(),
            size: size[a],
        });
        active[b] = false;
        id[a] = n + step;

        if step + 1 == n - 1 {
            break;
        }
        let (d, l) = nearest(a, &active, &d2);
        nn_d[a] = d;
        nn[a] = l;
        for k in (0..n).filter(|&k| active[k] && k != a) {
            if nn[k] == a || nn[k] == b {
                let (d, l) = nearest(k, &active, &d2);
                nn_d[k] = d;
                nn[k] = l;
            } else {
                let d = d2[at(k, a)];
                if d < nn_d[k] || (d == nn_d[k] && a < nn[k]) {
                    nn_d[k] = d;
                    nn[k] = a;
                }
            }
        }
    }
    LinkageTree { n, merges }
}

/// Statistics of the logged merge heights and the resulting cut level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutParameters {
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Smallest positive logged height.
    pub min_log_height: f64,
}

/// `mu`/`sigma` of `ln(height)` over the positive heights, `tau = mu + sigma`.
pub fn cut_parameters(tree: &LinkageTree) -> Result<CutParameters> {
    let logs: Vec<f64> = tree
        .heights()
        .filter(|h| *h > 0.0)
        .map(f64::ln)
        .collect();
    if logs.is_empty() {
        return Err(Error::DegenerateCut);
    }
    let m = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / m;
    let sigma = (logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / m).sqrt();
    let min_log_height = logs.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CutParameters {
        mu,
        sigma,
        tau: mu + sigma,
        min_log_height,
    })
}

/// Flat cluster ids per instance, contiguous from 0 in order of first leaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatClustering {
    pub cluster_of: Vec<usize>,
    pub k: usize,
}

impl FlatClustering {
    /// Renumbers arbitrary labels to `0..k` by first appearance.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let cluster_of: Vec<usize> = raw
            .iter()
            .map(|r| {
                let next = map.len();
                *map.entry(*r).or_insert(next)
            })
            .collect();
        Self {
            k: map.len(),
            cluster_of,
        }
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.cluster_of.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

/// Assigns every instance to the largest subtree containing it whose merges
/// all satisfy `ln(height) <= tau`; unmerged instances become singletons.
pub fn form_clusters(tree: &LinkageTree, tau: f64) -> FlatClustering {
    let n = tree.n;
    let within = |h: f64| h.ln() <= tau;
    // qualifies[t]: every merge in the subtree of cluster n + t is within the cut
    let mut qualifies = vec![false; tree.merges.len()];
    let subtree_ok = |id: usize, q: &[bool]| id < n || q[id - n];
    for (t, m) in tree.merges.iter().enumerate() {
        qualifies[t] = within(m.height)
            && subtree_ok(m.left, &qualifies)
            && subtree_ok(m.right, &qualifies);
    }

    let mut raw = vec![usize::MAX; n];
    // Visit merges from the root down; a qualifying node claims its leaves
    // unless an ancestor already did.
    let mut owner = vec![usize::MAX; tree.merges.len()];
    for t in (0..tree.merges.len()).rev() {
        let label = if owner[t] != usize::MAX {
            owner[t]
        } else if qualifies[t] {
            n + t
        } else {
            usize::MAX
        };
        let m = tree.merges[t];
        for child in [m.left, m.right] {
            if child < n {
                raw[child] = if label == usize::MAX { child } else { label };
            } else {
                owner[child - n] = label;
            }
        }
    }
    if n == 1 {
        raw[0] = 0;
    }
    FlatClustering::from_labels(&raw)
}

/// Output of the full clustering analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAnalysis {
    pub tree: LinkageTree,
    pub cut: CutParameters,
    pub clustering: FlatClustering,
}

/// Distances, Ward linkage, automatic cut and flat clusters in one call.
pub fn cluster(features: ArrayView2<'_, f64>) -> Result<ClusterAnalysis> {
    let dist = pairwise_euclidean(features)?;
    let tree = ward_linkage(&dist);
    let cut = cut_parameters(&tree)?;
    let clustering = form_clusters(&tree, cut.tau);
    Ok(ClusterAnalysis {
        tree,
        cut,
        clustering,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::Rng as _;

    fn random_points(n: usize, p: usize, seed: u64) -> Array2<f64> {
        let mut rng = crate::seed::rng(seed);
        Array2::from_shape_fn((n, p), |_| rng.random_range(-5.0..5.0))
    }

    #[test]
    fn three_four_five() {
        let d = pairwise_euclidean(array![[0.0, 0.0], [3.0, 4.0]].view()).unwrap();
        assert_eq!(d.get(0, 1), 5.0);
        let tree = ward_linkage(&d);
        assert_eq!(tree.merges(), &[Merge { left: 0, right: 1, height: 5.0, size: 2 }]);
    }

    #[test]
    fn duplicate_point_distance_zero() {
        let d = pairwise_euclidean(array![[1.5, -2.0], [1.5, -2.0], [0.0, 0.0]].view()).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        assert_eq!(d.get(1, 0), 0.0);
    }

    #[test]
    fn non_finite_rejected() {
        let x = array![[0.0, f64::NAN], [1.0, 1.0]];
        assert!(matches!(
            pairwise_euclidean(x.view()),
            Err(Error::NonFinite { row: 0, column: 1 })
        ));
    }

    #[test]
    fn distances_match_double_loop() {
        let x = random_points(6, 3, 11);
        let d = pairwise_euclidean(x.view()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let mut s = 0.0;
                for c in 0..3 {
                    s += (x[[i, c]] - x[[j, c]]).powi(2);
                }
                assert_abs_diff_eq!(d.get(i, j), s.sqrt(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cut_statistics() {
        let e = std::f64::consts::E;
        let tree = LinkageTree {
            n: 3,
            merges: vec![
                Merge { left: 0, right: 1, height: e, size: 2 },
                Merge { left: 2, right: 3, height: e, size: 3 },
            ],
        };
        let c = cut_parameters(&tree).unwrap();
        assert_abs_diff_eq!(c.mu, 1.0, epsilon = 1e-15);
        assert_eq!(c.sigma, 0.0);
        assert_abs_diff_eq!(c.tau, 1.0, epsilon = 1e-15);

        let tree = LinkageTree {
            n: 3,
            merges: vec![
                Merge { left: 0, right: 1, height: e, size: 2 },
                Merge { left: 2, right: 3, height: e.powi(3), size: 3 },
            ],
        };
        let c = cut_parameters(&tree).unwrap();
        assert_abs_diff_eq!(c.mu, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.sigma, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.tau, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn all_duplicates_is_degenerate() {
        let x = Array2::from_elem((4, 2), 3.0);
        assert!(matches!(cluster(x.view()), Err(Error::DegenerateCut)));
    }

    #[test]
    fn zero_heights_are_ignored_and_co_clustered() {
        let x = array![[0.0], [0.0], [10.0], [11.0]];
        let a = cluster(x.view()).unwrap();
        assert_eq!(a.tree.merges()[0].height, 0.0);
        assert_eq!(a.clustering.cluster_of[0], a.clustering.cluster_of[1]);
        let c = form_clusters(&a.tree, -1e9);
        assert_eq!(c.k, 3);
    }

    #[test]
    fn extreme_thresholds() {
        let x = random_points(12, 2, 3);
        let tree = ward_linkage(&pairwise_euclidean(x.view()).unwrap());
        let max = tree.heights().fold(0.0, f64::max);
        let min = tree.heights().fold(f64::INFINITY, f64::min);
        let all = form_clusters(&tree, max.ln() + 1e-9);
        assert_eq!(all.k, 1);
        let none = form_clusters(&tree, min.ln() - 1e-9);
        assert_eq!(none.k, 12);
        assert_eq!(none.cluster_of, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn two_blobs_split() {
        let x = array![
            [0.0, 0.0], [0.3, 0.1], [0.1, 0.4], [0.2, 0.2],
            [20.0, 20.0], [20.2, 20.3], [20.4, 20.1], [20.1, 20.2]
        ];
        let a = cluster(x.view()).unwrap();
        let c = &a.clustering.cluster_of;
        assert!(c[..4].iter().all(|&v| v == c[0]));
        assert!(c[4..].iter().all(|&v| v == c[4]));
        assert_ne!(c[0], c[4]);
    }

    #[test]
    fn dendrogram_lines() {
        let tree = ward_linkage(&pairwise_euclidean(array![[0.0], [1.0], [5.0]].view()).unwrap());
        let mut buf = Vec::new();
        tree.write_dendrogram(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("0 1 1 2\n"));
    }

    proptest! {
        #[test]
        fn linkage_is_monotone_and_complete(n in 2usize..30, p in 1usize..4, seed in any::<u64>()) {
            let x = random_points(n, p, seed);
            let tree = ward_linkage(&pairwise_euclidean(x.view()).unwrap());
            let h: Vec<f64> = tree.heights().collect();
            for w in h.windows(2) {
                prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
            }
            prop_assert_eq!(tree.merges().last().unwrap().size, n);
            let mut seen = vec![0u8; 2 * n - 1];
            for m in tree.merges() {
                seen[m.left] += 1;
                seen[m.right] += 1;
            }
            prop_assert!(seen[..2 * n - 2].iter().all(|&s| s == 1));
        }

        #[test]
        fn raising_tau_never_adds_clusters(seed in any::<u64>(), t1 in -3.0f64..3.0, dt in 0.0f64..3.0) {
            let x = random_points(15, 2, seed);
            let tree = ward_linkage(&pairwise_euclidean(x.view()).unwrap());
            prop_assert!(form_clusters(&tree, t1 + dt).k <= form_clusters(&tree, t1).k);
        }

        #[test]
        fn clustering_is_partition(n in 2usize..40, seed in any::<u64>()) {
            let x = random_points(n, 3, seed);
            let a = cluster(x.view()).unwrap();
            prop_assert_eq!(a.clustering.cluster_of.len(), n);
            let mut count = 0;
            for m in a.clustering.members() {
                prop_assert!(!m.is_empty());
                count += m.len();
            }
            prop_assert_eq!(count, n);
        }
    }
}
