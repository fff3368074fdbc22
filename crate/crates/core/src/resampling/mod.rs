//! Training-set resampling baselines.
//!
//! Label 1 is treated as the minority class. Every resampler returns the
//! kept original rows first, in their original order, followed by the added
//! rows; [`Resampled::origin`] records where each output row came from.

pub mod neighbors;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seed;
use neighbors::{k_nearest, nearest_sq_dist, sq_dist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResampleMethod {
    RandomOver,
    RandomUnder,
    Smote,
    Adasyn,
    NearMiss,
    Oss,
}

impl ResampleMethod {
    pub fn default_k(self) -> usize {
        match self {
            ResampleMethod::NearMiss => 3,
            _ => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub method: ResampleMethod,
    pub k_neighbors: usize,
    /// Desired minority/majority count ratio after resampling.
    pub target_ratio: f64,
    pub seed: u64,
}

impl ResamplePlan {
    /// Default neighbour count and a target ratio of 1.
    pub fn new(method: ResampleMethod, seed: u64) -> Self {
        Self {
            method,
            k_neighbors: method.default_k(),
            target_ratio: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::InvalidInput("k_neighbors must be at least 1".into()));
        }
        if !(self.target_ratio > 0.0 && self.target_ratio <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "target_ratio must lie in (0, 1], got {}",
                self.target_ratio
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowOrigin {
    /// A copy of input row `i`.
    Original(usize),
    /// `base + gap * (neighbor - base)`.
    Synthetic {
        base: usize,
        neighbor: usize,
        gap: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Resampled {
    pub data: Dataset,
    pub origin: Vec<RowOrigin>,
}

pub fn resample(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    match plan.method {
        ResampleMethod::RandomOver => random_oversample(d, plan),
        ResampleMethod::RandomUnder => random_undersample(d, plan),
        ResampleMethod::Smote => smote(d, plan),
        ResampleMethod::Adasyn => adasyn(d, plan),
        ResampleMethod::NearMiss => nearmiss(d, plan),
        ResampleMethod::Oss => oss(d, plan),
    }
}

/// Indices of class 0 and class 1.
fn split_classes(labels: &[u8]) -> (Vec<usize>, Vec<usize>) {
    (0..labels.len()).partition(|&i| labels[i] == 0)
}

fn require_both(d: &Dataset, plan: &ResamplePlan) -> Result<(Vec<usize>, Vec<usize>)> {
    plan.validate()?;
    let (maj, min) = split_classes(d.labels());
    if min.is_empty() {
        return Err(Error::SingleClass(0));
    }
    if maj.is_empty() {
        return Err(Error::SingleClass(1));
    }
    Ok((maj, min))
}

/// Minority count an over-sampler should reach.
fn oversample_target(n_maj: usize, n_min: usize, ratio: f64) -> usize {
    ((ratio * n_maj as f64).round() as usize).max(n_min)
}

/// Majority count an under-sampler should keep.
fn undersample_target(n_maj: usize, n_min: usize, ratio: f64) -> usize {
    ((n_min as f64 / ratio).round() as usize).clamp(1, n_maj)
}

/// Kept original rows (ascending) followed by synthetic rows.
fn assemble(d: &Dataset, mut kept: Vec<usize>, added: Vec<RowOrigin>) -> Result<Resampled> {
    kept.sort_unstable();
    let x = d.features();
    let p = d.n_features();
    let n_out = kept.len() + added.len();
    let mut features = Array2::zeros((n_out, p));
    let mut labels = Vec::with_capacity(n_out);
    let mut origin: Vec<RowOrigin> = kept.iter().map(|&i| RowOrigin::Original(i)).collect();
    origin.extend(added);
    for (r, o) in origin.iter().enumerate() {
        match *o {
            RowOrigin::Original(i) => {
                features.row_mut(r).assign(&x.row(i));
                labels.push(d.labels()[i]);
            }
            RowOrigin::Synthetic { base, neighbor, gap } => {
                let (a, b) = (x.row(base), x.row(neighbor));
                for j in 0..p {
                    features[[r, j]] = a[j] + gap * (b[j] - a[j]);
                }
                labels.push(d.labels()[base]);
            }
        }
    }
    Ok(Resampled {
        data: d.derive(features, labels)?,
        origin,
    })
}

/// Duplicates minority rows, drawn with replacement, until the target ratio holds.
pub fn random_oversample(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    let (maj, min) = require_both(d, plan)?;
    let extra = oversample_target(maj.len(), min.len(), plan.target_ratio) - min.len();
    let mut rng = seed::rng(plan.seed);
    let added = (0..extra)
        .map(|_| RowOrigin::Original(min[rng.random_range(0..min.len())]))
        .collect();
    assemble(d, (0..d.n_rows()).collect(), added)
}

/// Drops majority rows without replacement until the target ratio holds.
pub fn random_undersample(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    let (maj, min) = require_both(d, plan)?;
    let keep = undersample_target(maj.len(), min.len(), plan.target_ratio);
    let mut rng = seed::rng(plan.seed);
    let mut kept = min;
    kept.extend(sample(&mut rng, maj.len(), keep).into_iter().map(|i| maj[i]));
    assemble(d, kept, Vec::new())
}

fn smote_neighbors(x: ArrayView2<'_, f64>, min: &[usize], k: usize) -> Vec<Vec<usize>> {
    min.iter().map(|&i| k_nearest(x, i, min, k)).collect()
}

fn check_minority_for_interpolation(min: &[usize]) -> Result<()> {
    if min.len() < 2 {
        return Err(Error::TooFewMinority {
            found: min.len(),
            required: 2,
        });
    }
    Ok(())
}

/// Synthetic minority rows interpolated towards one of the `k` nearest
/// minority neighbours of a randomly drawn minority base row.
pub fn smote(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    let (maj, min) = require_both(d, plan)?;
    check_minority_for_interpolation(&min)?;
    let extra = oversample_target(maj.len(), min.len(), plan.target_ratio) - min.len();
    let k = plan.k_neighbors.min(min.len() - 1);
    let nn = smote_neighbors(d.features(), &min, k);
    let mut rng = seed::rng(plan.seed);
    let added = (0..extra)
        .map(|_| {
            let b = rng.random_range(0..min.len());
            let neighbor = nn[b][rng.random_range(0..nn[b].len())];
            RowOrigin::Synthetic {
                base: min[b],
                neighbor,
                gap: rng.random::<f64>(),
            }
        })
        .collect();
    assemble(d, (0..d.n_rows()).collect(), added)
}

/// Splits `total` in proportion to `weights` by largest remainder; equal
/// remainders favour the lower index.
pub fn allocate(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// ADASYN difficulty ratios: for each minority row, the fraction of
/// majority rows among its `k` nearest neighbours in the whole dataset.
pub fn adasyn_ratios(d: &Dataset, k: usize) -> Vec<f64> {
    let x = d.features();
    let all: Vec<usize> = (0..d.n_rows()).collect();
    let k = k.min(d.n_rows() - 1);
    (0..d.n_rows())
        .filter(|&i| d.labels()[i] == 1)
        .map(|i| {
            let nn = k_nearest(x, i, &all, k);
            nn.iter().filter(|&&j| d.labels()[j] == 0).count() as f64 / k as f64
        })
        .collect()
}

/// SMOTE-style generation with per-row budgets proportional to the share of
/// majority rows among each minority row's neighbours.
pub fn adasyn(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    let (maj, min) = require_both(d, plan)?;
    check_minority_for_interpolation(&min)?;
    let r = adasyn_ratios(d, plan.k_neighbors);
    if r.iter().all(|&v| v == 0.0) {
        log::warn!(
            "{}: no minority row has majority neighbours, falling back to SMOTE",
            d.name()
        );
        return smote(d, plan);
    }
    let extra = oversample_target(maj.len(), min.len(), plan.target_ratio) - min.len();
    let counts = allocate(&r, extra);
    let k = plan.k_neighbors.min(min.len() - 1);
    let nn = smote_neighbors(d.features(), &min, k);
    let mut rng = seed::rng(plan.seed);
    let mut added = Vec::with_capacity(extra);
    for (b, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            let neighbor = nn[b][rng.random_range(0..nn[b].len())];
            added.push(RowOrigin::Synthetic {
                base: min[b],
                neighbor,
                gap: rng.random::<f64>(),
            });
        }
    }
    assemble(d, (0..d.n_rows()).collect(), added)
}

/// NearMiss-1: keeps the majority rows with the smallest mean distance to
/// their `k` nearest minority rows.
pub fn nearmiss(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    let (maj, min) = require_both(d, plan)?;
    let keep = undersample_target(maj.len(), min.len(), plan.target_ratio);
    let x = d.features();
    let k = plan.k_neighbors.min(min.len());
    let mut scored: Vec<(f64, usize)> = maj
        .iter()
        .map(|&i| {
            let mut dist: Vec<f64> = min.iter().map(|&j| sq_dist(x.row(i), x.row(j)).sqrt()).collect();
            dist.sort_by(f64::total_cmp);
            (dist[..k].iter().sum::<f64>() / k as f64, i)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut kept = min;
    kept.extend(scored[..keep].iter().map(|s| s.1));
    assemble(d, kept, Vec::new())
}

/// Cross-class pairs `(i, j)`, `i < j`, such that no row lies closer to
/// either of them than they lie to each other.
pub fn tomek_links(x: ArrayView2<'_, f64>, labels: &[u8]) -> Vec<(usize, usize)> {
    let nearest = nearest_sq_dist(x);
    let n = x.nrows();
    let mut links = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if labels[i] != labels[j] {
                let dij = sq_dist(x.row(i), x.row(j));
                if dij <= nearest[i] && dij <= nearest[j] {
                    links.push((i, j));
                }
            }
        }
    }
    links
}

/// One-sided selection: a condensed nearest-neighbour pass seeded with every
/// minority row and one random majority row, then removal of the majority
/// members of Tomek links within the condensed set.
pub fn oss(d: &Dataset, plan: &ResamplePlan) -> Result<Resampled> {
    let (maj, min) = require_both(d, plan)?;
    let x = d.features();
    let labels = d.labels();
    let mut rng = seed::rng(plan.seed);
    let seed_row = maj[rng.random_range(0..maj.len())];
    let mut store = min.clone();
    store.push(seed_row);
    let mut condensed = store.clone();
    for &i in maj.iter().filter(|&&i| i != seed_row) {
        let nn = k_nearest(x, i, &store, 1);
        if labels[nn[0]] != labels[i] {
            condensed.push(i);
        }
    }
    condensed.sort_unstable();

    let sub_x = x.select(Axis(0), &condensed);
    let sub_y: Vec<u8> = condensed.iter().map(|&i| labels[i]).collect();
    let mut drop = vec![false; condensed.len()];
    for (a, b) in tomek_links(sub_x.view(), &sub_y) {
        for m in [a, b] {
            if sub_y[m] == 0 {
                drop[m] = true;
            }
        }
    }
    let kept: Vec<usize> = condensed
        .iter()
        .zip(&drop)
        .filter(|(_, &dropped)| !dropped)
        .map(|(&i, _)| i)
        .collect();
    if kept.len() == min.len() {
        log::warn!("{}: one-sided selection removed every majority row", d.name());
    }
    assemble(d, kept, Vec::new())
}
