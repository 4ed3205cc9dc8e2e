use serde::{Deserialize, Serialize};

use super::params::MlpParams;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

/// First/second moment accumulators for every parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: MlpParams,
    pub v: MlpParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &MlpParams, config: AdamConfig) -> Self {
        Self {
            config,
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }

    /// One bias-corrected Adam update. A non-finite parameter afterwards is
    /// a hard error naming the tensor.
    pub fn step(&mut self, params: &mut MlpParams, grads: &MlpParams) -> Result<()> {
        if params.dims() != grads.dims() || params.dims() != self.m.dims() {
            return Err(Error::InvalidInput("Adam shapes do not match".into()));
        }
        self.t += 1;
        let AdamConfig {
            learning_rate: lr,
            beta1: b1,
            beta2: b2,
            epsilon: eps,
        } = self.config;
        let bc1 = 1.0 - b1.powi(self.t as i32);
        let bc2 = 1.0 - b2.powi(self.t as i32);

        let tensors = params
            .tensors_mut()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut().zip(self.v.tensors_mut()));
        for (((name, theta), (_, g)), ((_, m), (_, v))) in tensors {
            let mut finite = true;
            for (((th, &g), m), v) in theta.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *th -= lr * m_hat / (v_hat.sqrt() + eps);
                finite &= th.is_finite();
            }
            if !finite {
                return Err(Error::NonFinite {
                    tensor: name.to_string(),
                });
            }
        }
        Ok(())
    }
}
