//! Linear SVM trained with Pegasos stochastic subgradient steps.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_dim, require_two_classes};
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::SparseVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub epochs: usize,
    pub lambda: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            lambda: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    /// Signed margin `w·x + b`.
    pub fn score(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.weights.len(), x)?;
        Ok(x.dot_dense(&self.weights) + self.bias)
    }

    /// Veg when the margin is non-negative.
    pub fn predict(&self, x: &SparseVector) -> Result<u8> {
        Ok(u8::from(self.score(x)? >= 0.0))
    }
}

/// Pegasos on hinge loss + `(λ/2)‖w‖²`. The bias is an extra constant
/// feature and is regularized with the weights. `w` is kept as `s·v` so the
/// per-step shrink costs O(1).
pub fn train_linear_svm(data: &LabeledMatrix, config: &SvmConfig, seed: u64) -> Result<LinearSvm> {
    require_two_classes(data)?;
    if config.lambda.is_nan() || config.lambda <= 0.0 {
        return Err(Error::InvalidInput("SVM lambda must be positive".into()));
    }
    let lambda = config.lambda;
    let dim = data.dim();
    let mut v = vec![0.0; dim + 1];
    let mut s = 1.0f64;
    let mut norm_sq = 0.0f64; // of w = s·v
    let radius_sq = 1.0 / lambda;
    let mut rng = seed::rng(seed, seed::stream::BASELINE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t = 0u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = &data.rows()[i];
            let y = if data.labels()[i] == 1 { 1.0 } else { -1.0 };
            let wx = s * (x.dot_dense(&v[..dim]) + v[dim]);
            let shrink = 1.0 - eta * lambda;
            if shrink <= 0.0 {
                v.fill(0.0);
                s = 1.0;
                norm_sq = 0.0;
            } else {
                s *= shrink;
                norm_sq *= shrink * shrink;
            }
            if y * wx < 1.0 {
                // w += eta·y·x̃ with x̃ = (x, 1).
                let a = eta * y;
                let cur = if shrink <= 0.0 { 0.0 } else { wx * shrink };
                let x_norm_sq = x.norm_sq() + 1.0;
                norm_sq += 2.0 * a * cur + a * a * x_norm_sq;
                for (j, xv) in x.iter() {
                    v[j] += a * xv / s;
                }
                v[dim] += a / s;
            }
            if norm_sq > radius_sq {
                let k = (radius_sq / norm_sq).sqrt();
                s *= k;
                norm_sq = radius_sq;
            }
            if s < 1e-100 {
                for vj in v.iter_mut() {
                    *vj *= s;
                }
                s = 1.0;
            }
        }
    }
    let weights: Vec<f64> = v[..dim].iter().map(|vj| vj * s).collect();
    let bias = v[dim] * s;
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite {
            tensor: "svm weights".into(),
        });
    }
    Ok(LinearSvm { weights, bias })
}
