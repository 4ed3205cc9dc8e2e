//! Parameters, forward pass, loss and analytic gradients of the
//! input → h1 → h2 → 1 ReLU/ReLU/sigmoid network.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::SparseVector;

/// Probability clamp applied before every logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

/// A dense layer; `w` is `rows × cols` row-major with `rows` = fan-in.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; cols],
        }
    }

    fn uniform(rows: usize, cols: usize, limit: f64, rng: &mut impl Rng) -> Self {
        let w = (0..rows * cols)
            .map(|_| rng.gen_range(-limit..=limit))
            .collect();
        Self {
            rows,
            cols,
            w,
            b: vec![0.0; cols],
        }
    }

    fn forward_dense(&self, input: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        for (i, &x) in input.iter().enumerate() {
            if x != 0.0 {
                let row = &self.w[i * self.cols..(i + 1) * self.cols];
                for (o, w) in out.iter_mut().zip(row) {
                    *o += x * w;
                }
            }
        }
    }

    fn forward_sparse(&self, input: &SparseVector, out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        for (i, x) in input.iter() {
            let row = &self.w[i * self.cols..(i + 1) * self.cols];
            for (o, w) in out.iter_mut().zip(row) {
                *o += x * w;
            }
        }
    }
}

/// Weights of the three dense layers.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpParams {
    pub layers: [Dense; 3],
}

pub const TENSOR_NAMES: [[&str; 2]; 3] = [["W1", "b1"], ["W2", "b2"], ["W3", "b3"]];

impl MlpParams {
    pub fn zeros(input: usize, h1: usize, h2: usize) -> Self {
        Self {
            layers: [
                Dense::zeros(input, h1),
                Dense::zeros(h1, h2),
                Dense::zeros(h2, 1),
            ],
        }
    }

    /// He-uniform hidden layers, Glorot-uniform output layer, zero biases.
    pub fn init(input: usize, h1: usize, h2: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed, seed::stream::INIT);
        let he = |fan_in: usize| (6.0 / fan_in as f64).sqrt();
        let l1 = Dense::uniform(input, h1, he(input), &mut rng);
        let l2 = Dense::uniform(h1, h2, he(h1), &mut rng);
        let l3 = Dense::uniform(h2, 1, (6.0 / (h2 + 1) as f64).sqrt(), &mut rng);
        Self {
            layers: [l1, l2, l3],
        }
    }

    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        let layers: [Dense; 3] = layers.try_into().map_err(|v: Vec<Dense>| {
            Error::Corrupt(format!("expected 3 layers, found {}", v.len()))
        })?;
        for l in &layers {
            if l.w.len() != l.rows * l.cols || l.b.len() != l.cols {
                return Err(Error::Corrupt(format!(
                    "layer {}x{} has {} weights and {} biases",
                    l.rows,
                    l.cols,
                    l.w.len(),
                    l.b.len()
                )));
            }
        }
        if layers[0].cols != layers[1].rows
            || layers[1].cols != layers[2].rows
            || layers[2].cols != 1
        {
            return Err(Error::Corrupt(
                "layer shapes do not chain to a single output".into(),
            ));
        }
        Ok(Self { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].rows
    }

    pub fn hidden(&self) -> [usize; 2] {
        [self.layers[0].cols, self.layers[1].cols]
    }

    /// `(rows, cols)` for each layer.
    pub fn dims(&self) -> [(usize, usize); 3] {
        [0, 1, 2].map(|k| (self.layers[k].rows, self.layers[k].cols))
    }

    pub fn zeros_like(&self) -> Self {
        let [a, b, c] = self.dims();
        Self {
            layers: [
                Dense::zeros(a.0, a.1),
                Dense::zeros(b.0, b.1),
                Dense::zeros(c.0, c.1),
            ],
        }
    }

    /// Sum of squared weights (biases excluded).
    pub fn weight_norm_sq(&self) -> f64 {
        self.layers
            .iter()
            .map(|l| l.w.iter().map(|w| w * w).sum::<f64>())
            .sum()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Every tensor with its name, in checkpoint order.
    pub fn tensors(&self) -> impl Iterator<Item = (&'static str, &[f64])> {
        self.layers
            .iter()
            .zip(TENSOR_NAMES)
            .flat_map(|(l, [wn, bn])| [(wn, l.w.as_slice()), (bn, l.b.as_slice())])
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = (&'static str, &mut Vec<f64>)> {
        self.layers
            .iter_mut()
            .zip(TENSOR_NAMES)
            .flat_map(|(l, [wn, bn])| [(wn, &mut l.w), (bn, &mut l.b)])
    }

    pub fn check_finite(&self) -> Result<()> {
        for (name, t) in self.tensors() {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    tensor: name.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// Pre- and post-activations of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Cache {
    pub z1: Vec<f64>,
    pub h1: Vec<f64>,
    pub z2: Vec<f64>,
    pub h2: Vec<f64>,
    pub z3: f64,
    pub yhat: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn relu_into(z: &[f64], h: &mut [f64]) {
    for (h, &z) in h.iter_mut().zip(z) {
        *h = if z > 0.0 { z } else { 0.0 };
    }
}

/// Forward pass; cost scales with `nnz(x)` in the first layer.
pub fn forward(params: &MlpParams, x: &SparseVector) -> Result<(f64, Cache)> {
    if x.dim() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim(),
            found: x.dim(),
        });
    }
    let [l1, l2, l3] = &params.layers;
    let mut z1 = vec![0.0; l1.cols];
    l1.forward_sparse(x, &mut z1);
    let mut h1 = vec![0.0; l1.cols];
    relu_into(&z1, &mut h1);
    let mut z2 = vec![0.0; l2.cols];
    l2.forward_dense(&h1, &mut z2);
    let mut h2 = vec![0.0; l2.cols];
    relu_into(&z2, &mut h2);
    let mut z3 = [0.0];
    l3.forward_dense(&h2, &mut z3);
    let yhat = sigmoid(z3[0]);
    Ok((
        yhat,
        Cache {
            z1,
            h1,
            z2,
            h2,
            z3: z3[0],
            yhat,
        },
    ))
}

pub fn predict_proba(params: &MlpParams, x: &SparseVector) -> Result<f64> {
    forward(params, x).map(|(p, _)| p)
}

/// Label 1 (Veg) iff the probability reaches `threshold`.
pub fn predict(params: &MlpParams, x: &SparseVector, threshold: f64) -> Result<(u8, f64)> {
    let p = predict_proba(params, x)?;
    Ok((u8::from(p >= threshold), p))
}

pub fn bce_term(yhat: f64, y: f64) -> f64 {
    let p = yhat.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross-entropy plus `lambda * ||W||^2` over all weight matrices.
pub fn loss(yhat: &[f64], y: &[f64], params: &MlpParams, lambda: f64) -> Result<f64> {
    if yhat.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions but {} targets",
            yhat.len(),
            y.len()
        )));
    }
    if yhat.is_empty() {
        return Err(Error::Empty("loss over an empty batch".into()));
    }
    let data: f64 = yhat
        .iter()
        .zip(y)
        .map(|(&p, &t)| bce_term(p, t))
        .sum::<f64>()
        / yhat.len() as f64;
    Ok(data + lambda * params.weight_norm_sq())
}

/// Adds `scale ×` the data-term gradient of one example into `grads`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn accumulate(
    grads: &mut MlpParams,
    cache: &Cache,
    x: &SparseVector,
    y: f64,
    params: &MlpParams,
    scale: f64,
    delta1: &mut [f64],
    delta2: &mut [f64],
) {
    let [l1, l2, l3] = &params.layers;
    let [g1, g2, g3] = &mut grads.layers;
    let d3 = (cache.yhat - y) * scale;
    g3.b[0] += d3;
    for (j, &h) in cache.h2.iter().enumerate() {
        g3.w[j] += d3 * h;
        delta2[j] = if cache.z2[j] > 0.0 { d3 * l3.w[j] } else { 0.0 };
    }
    let h2n = l2.cols;
    for (j, d) in delta2.iter().enumerate() {
        g2.b[j] += d;
    }
    for (i, &h) in cache.h1.iter().enumerate() {
        let wrow = &l2.w[i * h2n..(i + 1) * h2n];
        let mut back = 0.0;
        for (w, d) in wrow.iter().zip(delta2.iter()) {
            back += w * d;
        }
        delta1[i] = if cache.z1[i] > 0.0 { back } else { 0.0 };
        if h != 0.0 {
            let grow = &mut g2.w[i * h2n..(i + 1) * h2n];
            for (g, d) in grow.iter_mut().zip(delta2.iter()) {
                *g += h * d;
            }
        }
    }
    let h1n = l1.cols;
    for (i, d) in delta1.iter().enumerate() {
        g1.b[i] += d;
    }
    for (f, v) in x.iter() {
        let grow = &mut g1.w[f * h1n..(f + 1) * h1n];
        for (g, d) in grow.iter_mut().zip(delta1.iter()) {
            *g += v * d;
        }
    }
}

/// Adds the L2 gradient `2 * lambda * W` to every weight matrix.
pub(crate) fn add_l2_gradient(grads: &mut MlpParams, params: &MlpParams, lambda: f64) {
    if lambda == 0.0 {
        return;
    }
    for (g, p) in grads.layers.iter_mut().zip(&params.layers) {
        for (gw, w) in g.w.iter_mut().zip(&p.w) {
            *gw += 2.0 * lambda * w;
        }
    }
}

/// Gradient of the single-example objective `bce(ŷ, y) + λ||W||²`.
pub fn backward(
    cache: &Cache,
    x: &SparseVector,
    y: f64,
    params: &MlpParams,
    lambda: f64,
) -> MlpParams {
    let mut grads = params.zeros_like();
    let [h1, h2] = params.hidden();
    let (mut d1, mut d2) = (vec![0.0; h1], vec![0.0; h2]);
    accumulate(&mut grads, cache, x, y, params, 1.0, &mut d1, &mut d2);
    add_l2_gradient(&mut grads, params, lambda);
    grads
}

fn set_param(params: &mut MlpParams, tensor: usize, index: usize, value: f64) {
    params.tensors_mut().nth(tensor).expect("six tensors").1[index] = value;
}

/// Largest relative error between [`backward`] and central finite
/// differences of the single-example objective, over every parameter.
/// The relative error of one entry is `|a − n| / max(|a|, |n|, 1e-5)`; the
/// floor keeps vanishing gradients (inactive ReLUs) from dividing by zero.
pub fn gradient_check(
    params: &MlpParams,
    x: &SparseVector,
    y: f64,
    lambda: f64,
    step: f64,
) -> Result<f64> {
    let (_, cache) = forward(params, x)?;
    let analytic: Vec<Vec<f64>> = backward(&cache, x, y, params, lambda)
        .tensors()
        .map(|(_, t)| t.to_vec())
        .collect();
    let objective =
        |p: &MlpParams| -> Result<f64> { loss(&[predict_proba(p, x)?], &[y], p, lambda) };
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for (k, grad) in analytic.iter().enumerate() {
        for (i, &a) in grad.iter().enumerate() {
            let original = params.tensors().nth(k).expect("six tensors").1[i];
            set_param(&mut probe, k, i, original + step);
            let up = objective(&probe)?;
            set_param(&mut probe, k, i, original - step);
            let down = objective(&probe)?;
            set_param(&mut probe, k, i, original);
            let n = (up - down) / (2.0 * step);
            worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(1e-5));
        }
    }
    Ok(worst)
}

/// Reusable buffers for minibatch gradients.
pub(crate) struct GradScratch {
    pub grads: MlpParams,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl GradScratch {
    pub fn new(params: &MlpParams) -> Self {
        let [h1, h2] = params.hidden();
        Self {
            grads: params.zeros_like(),
            d1: vec![0.0; h1],
            d2: vec![0.0; h2],
        }
    }
}

/// Fills `scratch.grads` with the minibatch gradient and returns the batch loss.
pub(crate) fn batch_gradient(
    params: &MlpParams,
    batch: &[(&SparseVector, f64)],
    lambda: f64,
    scratch: &mut GradScratch,
) -> Result<f64> {
    for (_, t) in scratch.grads.tensors_mut() {
        t.fill(0.0);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut data_loss = 0.0;
    for &(x, y) in batch {
        let (yhat, cache) = forward(params, x)?;
        data_loss += bce_term(yhat, y);
        accumulate(
            &mut scratch.grads,
            &cache,
            x,
            y,
            params,
            scale,
            &mut scratch.d1,
            &mut scratch.d2,
        );
    }
    add_l2_gradient(&mut scratch.grads, params, lambda);
    Ok(data_loss * scale + lambda * params.weight_norm_sq())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (MlpParams, SparseVector) {
        // 2 -> 2 -> 2 -> 1 with hand-set weights.
        let l1 = Dense {
            rows: 2,
            cols: 2,
            w: vec![0.5, -1.0, 0.25, 2.0],
            b: vec![0.1, -0.2],
        };
        let l2 = Dense {
            rows: 2,
            cols: 2,
            w: vec![1.0, -0.5, 0.5, 1.5],
            b: vec![0.0, 0.3],
        };
        let l3 = Dense {
            rows: 2,
            cols: 1,
            w: vec![0.7, -1.2],
            b: vec![0.05],
        };
        let p = MlpParams::from_layers(vec![l1, l2, l3]).unwrap();
        (p, SparseVector::new(2, vec![(0, 1.0), (1, 2.0)]).unwrap())
    }

    #[test]
    fn toy_forward_matches_hand_arithmetic() {
        let (p, x) = toy();
        // z1 = [0.1 + 0.5 + 0.5, -0.2 - 1.0 + 4.0] = [1.1, 2.8]
        // z2 = [1.1*1.0 + 2.8*0.5, 0.3 + 1.1*-0.5 + 2.8*1.5] = [2.5, 3.95]
        // z3 = 0.05 + 2.5*0.7 - 3.95*1.2 = -2.94
        let (y, c) = forward(&p, &x).unwrap();
        assert!((c.z1[0] - 1.1).abs() < 1e-12 && (c.z1[1] - 2.8).abs() < 1e-12);
        assert!((c.z2[0] - 2.5).abs() < 1e-12 && (c.z2[1] - 3.95).abs() < 1e-12);
        assert!((c.z3 + 2.94).abs() < 1e-12);
        assert!((y - 1.0 / (1.0 + 2.94f64.exp())).abs() < 1e-12);
    }

    #[test]
    fn zero_network_is_half() {
        let p = MlpParams::zeros(5, 4, 3);
        let x = SparseVector::new(5, vec![(1, 0.6), (3, 0.8)]).unwrap();
        assert_eq!(forward(&p, &x).unwrap().0, 0.5);
        assert_eq!(forward(&p, &SparseVector::zeros(5)).unwrap().0, 0.5);
        assert_eq!(predict(&p, &x, 0.5).unwrap(), (1, 0.5));
    }

    #[test]
    fn dimension_mismatch() {
        let p = MlpParams::zeros(5, 4, 3);
        assert!(matches!(
            forward(&p, &SparseVector::zeros(4)),
            Err(Error::DimensionMismatch {
                expected: 5,
                found: 4
            })
        ));
    }

    #[test]
    fn init_bounds_and_determinism() {
        let p = MlpParams::init(5000, 64, 32, 11);
        assert!(p.layers.iter().all(|l| l.b.iter().all(|&b| b == 0.0)));
        let bound = (6.0f64 / 5000.0).sqrt();
        assert!(p.layers[0].w.iter().all(|w| w.abs() <= bound));
        assert!(p.layers[1]
            .w
            .iter()
            .all(|w| w.abs() <= (6.0f64 / 64.0).sqrt()));
        assert!(p.layers[2]
            .w
            .iter()
            .all(|w| w.abs() <= (6.0f64 / 33.0).sqrt()));
        assert_eq!(p, MlpParams::init(5000, 64, 32, 11));
        assert_ne!(p, MlpParams::init(5000, 64, 32, 12));
    }

    #[test]
    fn loss_examples() {
        let p = MlpParams::zeros(2, 2, 2);
        assert!((loss(&[0.5], &[1.0], &p, 0.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        let l = loss(&[0.9, 0.1], &[1.0, 0.0], &p, 0.0).unwrap();
        assert!((l - 0.105_360_515_657_826_3).abs() < 1e-12);
        assert!(loss(&[1.0, 0.0], &[1.0, 0.0], &p, 0.0).unwrap() <= 1e-11);
        assert!(loss(&[0.5], &[1.0, 0.0], &p, 0.0).is_err());
        let (toy, _) = toy();
        let pen = 0.01 * toy.weight_norm_sq();
        assert!((loss(&[0.5], &[1.0], &toy, 0.01).unwrap() - 2f64.ln() - pen).abs() < 1e-12);
    }

    #[test]
    fn zero_network_gradients() {
        let p = MlpParams::zeros(3, 2, 2);
        let x = SparseVector::zeros(3);
        let (_, c) = forward(&p, &x).unwrap();
        for y in [0.0, 1.0] {
            let g = backward(&c, &x, y, &p, 0.01);
            for l in &g.layers {
                assert!(l.w.iter().all(|&w| w == 0.0));
            }
            assert_eq!(g.layers[2].b[0], 0.5 - y);
        }
    }

    #[test]
    fn penalty_only_gradient_is_two_lambda_w() {
        let p = MlpParams::init(6, 4, 3, 2);
        let x = SparseVector::zeros(6);
        let (yhat, c) = forward(&p, &x).unwrap();
        // Targeting y = yhat removes the data term exactly.
        let g = backward(&c, &x, yhat, &p, 0.05);
        for (gl, pl) in g.layers.iter().zip(&p.layers) {
            for (gw, w) in gl.w.iter().zip(&pl.w) {
                assert_eq!(*gw, 2.0 * 0.05 * w);
            }
        }
    }
}
