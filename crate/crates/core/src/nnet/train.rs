//! Minibatch training with early stopping on validation loss.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::params::{self, batch_gradient, GradScratch, MlpParams};
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    #[default]
    #[serde(rename = "adam")]
    Adam,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    #[default]
    #[serde(rename = "binary_crossentropy")]
    BinaryCrossEntropy,
}

/// Training hyperparameters. Defaults follow the reference setup: batch 32,
/// 100 epochs, L2 0.01, patience 5, hidden layers 64 and 32, Adam, BCE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub l2_lambda: f64,
    pub patience: usize,
    pub learning_rate: f64,
    pub validation_fraction: f64,
    pub threshold: f64,
    pub hidden: [usize; 2],
    pub optimizer: Optimizer,
    pub loss: LossKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 32,
            max_epochs: 100,
            l2_lambda: 0.01,
            patience: 5,
            learning_rate: 0.001,
            validation_fraction: 0.1,
            threshold: 0.5,
            hidden: [64, 32],
            optimizer: Optimizer::Adam,
            loss: LossKind::BinaryCrossEntropy,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.patience == 0 {
            return bad("patience must be >= 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if !(self.l2_lambda.is_finite() && self.l2_lambda >= 0.0) {
            return bad(format!("l2_lambda must be >= 0, got {}", self.l2_lambda));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction must lie in (0, 1), got {}",
                self.validation_fraction
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            ));
        }
        if self.hidden.contains(&0) {
            return bad("hidden layer sizes must be positive".into());
        }
        Ok(())
    }
}

/// Metrics recorded after each epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub train_mae: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub history: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were restored.
    pub best_epoch: usize,
    pub best_val_loss: f64,
    /// 1-based epoch after which training halted.
    pub stopped_epoch: usize,
}

/// Loss, accuracy and hard-label MAE of `params` over `data`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
    pub mae: f64,
}

/// Evaluates with the full objective (mean BCE plus L2 penalty).
pub fn evaluate(
    params: &MlpParams,
    data: &LabeledMatrix,
    lambda: f64,
    threshold: f64,
) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation over an empty set".into()));
    }
    let mut bce = 0.0;
    let mut correct = 0usize;
    for (x, y) in data.iter() {
        let (label, p) = params::predict(params, x, threshold)?;
        bce += params::bce_term(p, f64::from(y));
        correct += usize::from(label == y);
    }
    let n = data.len() as f64;
    let accuracy = correct as f64 / n;
    Ok(Evaluation {
        loss: bce / n + lambda * params.weight_norm_sq(),
        accuracy,
        mae: (data.len() - correct) as f64 / n,
    })
}

/// Tracks the best validation loss under a strict-improvement rule.
#[derive(Clone, Debug, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Improved,
    Waiting,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, val_loss: f64) -> Verdict {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            Verdict::Improved
        } else {
            self.stale += 1;
            if self.stale >= self.patience {
                Verdict::Stop
            } else {
                Verdict::Waiting
            }
        }
    }

    pub fn best(&self) -> (usize, f64) {
        (self.best_epoch, self.best)
    }
}

/// Summary of an early-stopped loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopSummary {
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_epoch: usize,
}

/// Runs `epoch_fn` for up to `max_epochs` epochs. `epoch_fn` trains one
/// epoch in place and returns the validation loss. The state from the best
/// epoch is snapshotted and written back into `state` on exit.
pub fn run_with_early_stopping<S: Clone>(
    state: &mut S,
    max_epochs: usize,
    patience: usize,
    mut epoch_fn: impl FnMut(&mut S, usize) -> Result<f64>,
) -> Result<StopSummary> {
    let mut monitor = EarlyStopping::new(patience);
    let mut snapshot: Option<S> = None;
    let mut stopped_epoch = max_epochs;
    for epoch in 1..=max_epochs {
        let val = epoch_fn(state, epoch)?;
        if !val.is_finite() {
            return Err(Error::NonFinite {
                tensor: "val_loss".into(),
            });
        }
        match monitor.observe(epoch, val) {
            Verdict::Improved => snapshot = Some(state.clone()),
            Verdict::Waiting => {}
            Verdict::Stop => {
                stopped_epoch = epoch;
                break;
            }
        }
    }
    if let Some(best) = snapshot {
        *state = best;
    }
    let (best_epoch, best_val_loss) = monitor.best();
    Ok(StopSummary {
        best_epoch,
        best_val_loss,
        stopped_epoch,
    })
}

/// Stratified train/validation carve-out: `ceil(fraction * n_c)` rows of
/// each class go to validation.
pub fn validation_split(
    data: &LabeledMatrix,
    fraction: f64,
    seed: u64,
) -> Result<(LabeledMatrix, LabeledMatrix)> {
    let mut rng = seed::rng(seed, seed::stream::VALIDATION);
    let (mut train_idx, mut val_idx) = (Vec::new(), Vec::new());
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels()[i] == class)
            .collect();
        idx.shuffle(&mut rng);
        let n_val = (fraction * idx.len() as f64).ceil() as usize;
        if idx.len() < n_val + 2 {
            return Err(Error::InvalidInput(format!(
                "class {class} has {} examples; need at least 2 left after the validation carve-out",
                idx.len()
            )));
        }
        val_idx.extend_from_slice(&idx[..n_val]);
        train_idx.extend_from_slice(&idx[n_val..]);
    }
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    Ok((data.subset(&train_idx), data.subset(&val_idx)))
}

/// One pass over `data` in a freshly shuffled order.
pub(crate) fn run_epoch(
    params: &mut MlpParams,
    adam: &mut AdamState,
    data: &LabeledMatrix,
    batch_size: usize,
    lambda: f64,
    rng: &mut ChaCha8Rng,
    scratch: &mut GradScratch,
) -> Result<f64> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    let mut batches = 0usize;
    let mut batch = Vec::with_capacity(batch_size);
    for chunk in order.chunks(batch_size) {
        batch.clear();
        batch.extend(
            chunk
                .iter()
                .map(|&i| (&data.rows()[i], f64::from(data.labels()[i]))),
        );
        total += batch_gradient(params, &batch, lambda, scratch)?;
        adam.step(params, &scratch.grads)?;
        batches += 1;
    }
    Ok(total / batches.max(1) as f64)
}

/// Trains from `initial` for exactly `epochs` epochs without validation.
pub fn train_fixed_epochs(
    initial: MlpParams,
    data: &LabeledMatrix,
    epochs: usize,
    batch_size: usize,
    adam: AdamConfig,
    lambda: f64,
    seed: u64,
) -> Result<MlpParams> {
    if batch_size == 0 {
        return Err(Error::InvalidInput("batch_size must be >= 1".into()));
    }
    if data.dim() != initial.input_dim() && !data.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: initial.input_dim(),
            found: data.dim(),
        });
    }
    let mut params = initial;
    let mut state = AdamState::new(&params, adam);
    let mut rng = seed::rng(seed, seed::stream::SHUFFLE);
    let mut scratch = GradScratch::new(&params);
    for _ in 0..epochs {
        run_epoch(
            &mut params,
            &mut state,
            data,
            batch_size,
            lambda,
            &mut rng,
            &mut scratch,
        )?;
    }
    Ok(params)
}

/// Full training run with validation carve-out and early stopping.
pub fn train(data: &LabeledMatrix, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let (train_part, val_part) = validation_split(data, config.validation_fraction, config.seed)?;
    let [h1, h2] = config.hidden;
    let mut params = MlpParams::init(data.dim(), h1, h2, config.seed);
    let mut adam = AdamState::new(
        &params,
        AdamConfig::with_learning_rate(config.learning_rate),
    );
    let mut rng = seed::rng(config.seed, seed::stream::SHUFFLE);
    let mut scratch = GradScratch::new(&params);
    let mut history = Vec::new();

    let summary = run_with_early_stopping(
        &mut params,
        config.max_epochs,
        config.patience,
        |p, epoch| {
            run_epoch(
                p,
                &mut adam,
                &train_part,
                config.batch_size,
                config.l2_lambda,
                &mut rng,
                &mut scratch,
            )?;
            let tr = evaluate(p, &train_part, config.l2_lambda, config.threshold)?;
            let va = evaluate(p, &val_part, config.l2_lambda, config.threshold)?;
            history.push(EpochRecord {
                epoch,
                train_loss: tr.loss,
                val_loss: va.loss,
                train_accuracy: tr.accuracy,
                val_accuracy: va.accuracy,
                train_mae: tr.mae,
            });
            Ok(va.loss)
        },
    )?;

    Ok(TrainOutcome {
        params,
        history,
        best_epoch: summary.best_epoch,
        best_val_loss: summary.best_val_loss,
        stopped_epoch: summary.stopped_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Scripted {
        epoch: usize,
    }

    fn scripted(losses: &[f64], max_epochs: usize) -> (StopSummary, Scripted, usize) {
        let mut state = Scripted { epoch: 0 };
        let mut calls = 0;
        let s = run_with_early_stopping(&mut state, max_epochs, 5, |st, e| {
            calls += 1;
            st.epoch = e;
            Ok(losses[e - 1])
        })
        .unwrap();
        (s, state, calls)
    }

    #[test]
    fn patience_five_stops_after_epoch_seven() {
        let losses = [0.50, 0.40, 0.41, 0.42, 0.43, 0.44, 0.45, 0.30, 0.20];
        let (s, state, calls) = scripted(&losses, 100);
        assert_eq!(calls, 7);
        assert_eq!(s.stopped_epoch, 7);
        assert_eq!(s.best_epoch, 2);
        assert_eq!(state.epoch, 2);
        assert_eq!(losses[state.epoch - 1], 0.40);
    }

    #[test]
    fn monotone_decrease_runs_to_max() {
        let losses: Vec<f64> = (0..100).map(|i| 1.0 - i as f64 * 0.001).collect();
        let (s, state, calls) = scripted(&losses, 100);
        assert_eq!(
            (calls, s.best_epoch, s.stopped_epoch, state.epoch),
            (100, 100, 100, 100)
        );
    }

    #[test]
    fn equal_loss_is_not_improvement() {
        let mut m = EarlyStopping::new(2);
        assert_eq!(m.observe(1, 0.5), Verdict::Improved);
        assert_eq!(m.observe(2, 0.5), Verdict::Waiting);
        assert_eq!(m.observe(3, 0.5), Verdict::Stop);
        assert_eq!(m.best(), (1, 0.5));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig {
                batch_size: 0,
                ..Default::default()
            },
            TrainConfig {
                patience: 0,
                ..Default::default()
            },
            TrainConfig {
                l2_lambda: -1.0,
                ..Default::default()
            },
            TrainConfig {
                validation_fraction: 1.0,
                ..Default::default()
            },
            TrainConfig {
                hidden: [0, 4],
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn config_json_defaults() {
        let c: TrainConfig = serde_json::from_str(r#"{"seed": 9}"#).unwrap();
        assert_eq!(
            c,
            TrainConfig {
                seed: 9,
                ..Default::default()
            }
        );
        let v = serde_json::to_value(TrainConfig::default()).unwrap();
        assert_eq!(v["optimizer"], "adam");
        assert_eq!(v["loss"], "binary_crossentropy");
        assert!(serde_json::from_str::<TrainConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
