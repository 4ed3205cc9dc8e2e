//! Logistic regression trained with Adam on cross-entropy plus L2.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{check_dim, require_two_classes};
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::nnet::{sigmoid, AdamConfig};
use crate::seed;
use crate::sparse::SparseVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub epochs: usize,
    pub l2_lambda: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            l2_lambda: 1e-4,
            batch_size: 32,
            learning_rate: 0.001,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticRegression {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    /// Probability of Veg.
    pub fn score(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.weights.len(), x)?;
        Ok(sigmoid(x.dot_dense(&self.weights) + self.bias))
    }

    pub fn predict(&self, x: &SparseVector) -> Result<u8> {
        Ok(u8::from(self.score(x)? >= 0.5))
    }
}

/// Zero-initialized; minibatch Adam on mean BCE + `λ‖w‖²` (bias exempt).
pub fn train_logreg(
    data: &LabeledMatrix,
    config: &LogRegConfig,
    seed: u64,
) -> Result<LogisticRegression> {
    require_two_classes(data)?;
    if config.batch_size == 0 {
        return Err(Error::InvalidInput("batch_size must be >= 1".into()));
    }
    let dim = data.dim();
    let mut model = LogisticRegression::zeros(dim);
    let adam = AdamConfig::with_learning_rate(config.learning_rate);
    let (mut m, mut v) = (vec![0.0; dim + 1], vec![0.0; dim + 1]);
    let mut grad = vec![0.0; dim + 1];
    let mut t = 0i32;
    let mut rng = seed::rng(seed, seed::stream::BASELINE);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let scale = 1.0 / chunk.len() as f64;
            for (g, w) in grad.iter_mut().zip(&model.weights) {
                *g = 2.0 * config.l2_lambda * w;
            }
            grad[dim] = 0.0;
            for &i in chunk {
                let x = &data.rows()[i];
                let p = sigmoid(x.dot_dense(&model.weights) + model.bias);
                let delta = (p - f64::from(data.labels()[i])) * scale;
                for (j, xv) in x.iter() {
                    grad[j] += delta * xv;
                }
                grad[dim] += delta;
            }
            t += 1;
            let bc1 = 1.0 - adam.beta1.powi(t);
            let bc2 = 1.0 - adam.beta2.powi(t);
            for k in 0..=dim {
                let g = grad[k];
                m[k] = adam.beta1 * m[k] + (1.0 - adam.beta1) * g;
                v[k] = adam.beta2 * v[k] + (1.0 - adam.beta2) * g * g;
                let step = adam.learning_rate * (m[k] / bc1) / ((v[k] / bc2).sqrt() + adam.epsilon);
                if k < dim {
                    model.weights[k] -= step;
                } else {
                    model.bias -= step;
                }
            }
        }
        if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite {
                tensor: "logreg weights".into(),
            });
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::bce_term;

    /// Mean BCE of the model over `data`, for diagnostics.
    fn mean_bce(model: &LogisticRegression, data: &LabeledMatrix) -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in data.iter() {
            total += bce_term(model.score(x)?, f64::from(y));
        }
        Ok(total / data.len().max(1) as f64)
    }

    fn two_points() -> LabeledMatrix {
        let a = SparseVector::new(2, vec![(0, 1.0)]).unwrap();
        let b = SparseVector::new(2, vec![(1, 1.0)]).unwrap();
        LabeledMatrix::new(vec![a, b], vec![1, 0]).unwrap()
    }

    #[test]
    fn separable_pair_is_learned() {
        let data = two_points();
        let cfg = LogRegConfig {
            epochs: 200,
            ..Default::default()
        };
        let m = train_logreg(&data, &cfg, 1).unwrap();
        for (x, y) in data.iter() {
            assert_eq!(m.predict(x).unwrap(), y);
        }
        assert!(mean_bce(&m, &data).unwrap() < 0.69);
    }

    #[test]
    fn zero_epochs_gives_half() {
        let data = two_points();
        let m = train_logreg(
            &data,
            &LogRegConfig {
                epochs: 0,
                ..Default::default()
            },
            1,
        )
        .unwrap();
        for x in data.rows() {
            assert_eq!(m.score(x).unwrap(), 0.5);
            assert_eq!(m.predict(x).unwrap(), 1);
        }
    }

    #[test]
    fn single_class_rejected() {
        let a = SparseVector::new(2, vec![(0, 1.0)]).unwrap();
        let data = LabeledMatrix::new(vec![a.clone(), a], vec![1, 1]).unwrap();
        assert!(matches!(
            train_logreg(&data, &LogRegConfig::default(), 0),
            Err(Error::SingleClass(_))
        ));
    }
}
