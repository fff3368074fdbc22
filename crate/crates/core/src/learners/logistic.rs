//! L2-regularized logistic regression on internally standardized features.
//!
//! Minimizes `sum_i softplus(z_i) - y_i z_i + l2/2 * |w|^2` with
//! `z_i = w . x_i + b`; the intercept is not penalized. The optimizer takes
//! damped Newton steps with Armijo backtracking until the gradient norm drops
//! below the tolerance.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{check_xy, Classifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LogisticModel {
    /// All-zero weights on `p` unscaled features; scores 0.5 everywhere.
    pub fn zeros(p: usize) -> Self {
        Self {
            mean: vec![0.0; p],
            scale: vec![1.0; p],
            weights: vec![0.0; p],
            intercept: 0.0,
        }
    }

    /// Parameters in standardized space, `[w..., b]`.
    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.weights.clone();
        t.push(self.intercept);
        t
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl Classifier for LogisticModel {
    fn score(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        x.rows()
            .into_iter()
            .map(|row| {
                let z = row
                    .iter()
                    .enumerate()
                    .map(|(j, v)| self.weights[j] * (v - self.mean[j]) / self.scale[j])
                    .sum::<f64>()
                    + self.intercept;
                sigmoid(z)
            })
            .collect()
    }
}

/// The penalized negative log-likelihood over standardized features.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    x: Array2<f64>,
    y: Vec<f64>,
    l2: f64,
}

impl LogisticObjective {
    /// `x` is used as given; [`fit_logistic`] standardizes it first.
    pub fn new(x: Array2<f64>, y: &[u8], l2: f64) -> Self {
        Self {
            x,
            y: y.iter().map(|&v| f64::from(v)).collect(),
            l2,
        }
    }

    /// Parameter count, `p + 1`.
    pub fn dim(&self) -> usize {
        self.x.ncols() + 1
    }

    fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let p = self.x.ncols();
        self.x
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(&theta[..p]).map(|(a, w)| a * w).sum::<f64>() + theta[p])
            .collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let p = self.x.ncols();
        let loss: f64 = self
            .margins(theta)
            .iter()
            .zip(&self.y)
            .map(|(z, y)| softplus(*z) - y * z)
            .sum();
        loss + 0.5 * self.l2 * theta[..p].iter().map(|w| w * w).sum::<f64>()
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let p = self.x.ncols();
        let mut g = vec![0.0; p + 1];
        for ((row, z), y) in self.x.rows().into_iter().zip(self.margins(theta)).zip(&self.y) {
            let r = sigmoid(z) - y;
            for (gj, a) in g.iter_mut().zip(row) {
                *gj += r * a;
            }
            g[p] += r;
        }
        for j in 0..p {
            g[j] += self.l2 * theta[j];
        }
        g
    }

    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let p = self.x.ncols();
        let mut h = DMatrix::zeros(p + 1, p + 1);
        for (row, z) in self.x.rows().into_iter().zip(self.margins(theta)) {
            let s = sigmoid(z);
            let w = s * (1.0 - s);
            for a in 0..=p {
                let xa = if a < p { row[a] } else { 1.0 };
                for b in 0..=a {
                    let xb = if b < p { row[b] } else { 1.0 };
                    h[(a, b)] += w * xa * xb;
                }
            }
        }
        for a in 0..=p {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        for j in 0..p {
            h[(j, j)] += self.l2;
        }
        // Keeps the intercept direction invertible when every margin saturates.
        h[(p, p)] += 1e-10;
        h
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Standardized copy of `x` with the column means and scales used.
fn standardize(x: ArrayView2<'_, f64>) -> (Array2<f64>, Vec<f64>, Vec<f64>) {
    let n = x.nrows() as f64;
    let mean: Vec<f64> = x.columns().into_iter().map(|c| c.sum() / n).collect();
    let scale: Vec<f64> = x
        .columns()
        .into_iter()
        .zip(&mean)
        .map(|(c, m)| {
            let sd = (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    let mut z = x.to_owned();
    for mut row in z.rows_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - mean[j]) / scale[j];
        }
    }
    (z, mean, scale)
}

pub fn fit_logistic(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    check_xy(x, y)?;
    if x.nrows() < 2 {
        return Err(Error::InvalidInput("logistic regression needs at least 2 rows".into()));
    }
    for ((row, column), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, column });
        }
    }
    let (z, mean, scale) = standardize(x);
    let objective = LogisticObjective::new(z, y, config.l2);
    let d = objective.dim();
    let mut theta = vec![0.0; d];
    let mut f = objective.value(&theta);

    for _ in 0..config.max_iter {
        let g = objective.gradient(&theta);
        if norm(&g) <= config.tol {
            break;
        }
        let h = objective.hessian(&theta);
        let rhs = DVector::from_iterator(d, g.iter().map(|v| -v));
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&rhs),
            None => rhs.clone(),
        };
        let slope: f64 = step.iter().zip(&g).map(|(s, gi)| s * gi).sum();
        let mut t = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            let f_trial = objective.value(&trial);
            let flat = (f_trial - f).abs() <= 1e-12 * f.abs().max(1.0);
            if f_trial <= f + 1e-4 * t * slope || flat {
                break Some((trial, f_trial));
            }
            t *= 0.5;
            if t < 1e-12 {
                break None;
            }
        };
        match accepted {
            Some((trial, f_trial)) => {
                theta = trial;
                f = f_trial;
            }
            None => break,
        }
    }

    let p = d - 1;
    Ok(LogisticModel {
        mean,
        scale,
        weights: theta[..p].to_vec(),
        intercept: theta[p],
    })
}
