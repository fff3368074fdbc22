//! Brute-force Euclidean neighbour queries. Ties are broken by lower index.

use ndarray::{ArrayView1, ArrayView2};

pub fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// The `k` rows of `pool` closest to row `query`, nearest first. `query`
/// itself is skipped if it appears in `pool`.
pub fn k_nearest(x: ArrayView2<'_, f64>, query: usize, pool: &[usize], k: usize) -> Vec<usize> {
    let q = x.row(query);
    let mut cand: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&j| j != query)
        .map(|&j| (sq_dist(q, x.row(j)), j))
        .collect();
    let k = k.min(cand.len());
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() && k > 0 {
        cand.select_nth_unstable_by(k - 1, by_distance);
    }
    cand.truncate(k);
    cand.sort_by(by_distance);
    cand.into_iter().map(|(_, j)| j).collect()
}

/// Squared distance from every row to its nearest other row.
pub fn nearest_sq_dist(x: ArrayView2<'_, f64>) -> Vec<f64> {
    let n = x.nrows();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| sq_dist(x.row(i), x.row(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
