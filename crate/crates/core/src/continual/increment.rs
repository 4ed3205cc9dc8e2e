//! Warm-start fine-tuning on newly labeled dishes.

use serde::{Deserialize, Serialize};

use super::buffer::{ReplayBuffer, ReplayItem};
use crate::balance::LabeledMatrix;
use crate::corpus::DishRecord;
use crate::error::{Error, Result};
use crate::nnet::{train_fixed_epochs, AdamConfig, Checkpoint, CheckpointMeta};
use crate::pipeline::{self, PipelineOptions, TrainedModel};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Replay,
    Naive,
    FullRetrain,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Replay => "replay",
            Strategy::Naive => "naive",
            Strategy::FullRetrain => "full_retrain",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replay" => Ok(Strategy::Replay),
            "naive" => Ok(Strategy::Naive),
            "full_retrain" => Ok(Strategy::FullRetrain),
            other => Err(Error::InvalidInput(format!(
                "unknown strategy {other:?} (allowed: replay, naive, full_retrain)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncrementConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Replayed items per new item.
    pub replay_ratio: f64,
    pub l2_lambda: f64,
    pub seed: u64,
}

impl Default for IncrementConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 1e-4,
            batch_size: 32,
            replay_ratio: 1.0,
            l2_lambda: 0.01,
            seed: 0,
        }
    }
}

impl IncrementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidInput("learning_rate must be positive".into()));
        }
        if !(self.replay_ratio.is_finite() && self.replay_ratio >= 0.0) {
            return Err(Error::InvalidInput("replay_ratio must be >= 0".into()));
        }
        if self.l2_lambda.is_nan() || self.l2_lambda < 0.0 {
            return Err(Error::InvalidInput("l2_lambda must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IncrementOutcome {
    pub checkpoint: Checkpoint,
    pub new_count: usize,
    pub replayed_count: usize,
}

/// Fine-tunes `checkpoint` on `new_items` (plus a replay sample from
/// `buffer` under [`Strategy::Replay`]) for a fixed number of epochs with
/// fresh Adam moments, then adds the new items to the buffer. The
/// vocabulary is never refitted.
pub fn increment(
    checkpoint: &Checkpoint,
    buffer: &mut ReplayBuffer,
    new_items: &[DishRecord],
    strategy: Strategy,
    config: &IncrementConfig,
) -> Result<IncrementOutcome> {
    if new_items.is_empty() {
        return Err(Error::Empty("no new items to learn".into()));
    }
    if strategy == Strategy::FullRetrain {
        return Err(Error::InvalidInput(
            "full_retrain is not an increment; use full_retrain_baseline".into(),
        ));
    }
    config.validate()?;
    let new = pipeline::vectorize(
        &checkpoint.vectorizer,
        new_items,
        checkpoint.meta.include_ingredients,
    )?;

    let n_replay = match strategy {
        Strategy::Replay => (config.replay_ratio * new.len() as f64).floor() as usize,
        _ => 0,
    };
    let replayed = buffer.sample(n_replay, config.seed);
    let replayed_count = replayed.len();
    let mut rows = new.rows().to_vec();
    let mut labels = new.labels().to_vec();
    for item in replayed {
        rows.push(item.vector.clone());
        labels.push(item.label);
    }
    let data = LabeledMatrix::new(rows, labels)?;

    let params = train_fixed_epochs(
        checkpoint.params.clone(),
        &data,
        config.epochs,
        config.batch_size,
        AdamConfig::with_learning_rate(config.learning_rate),
        config.l2_lambda,
        seed::derive(config.seed, seed::stream::INCREMENT),
    )?;

    for (record, (x, y)) in new_items.iter().zip(new.iter()) {
        buffer.add(ReplayItem {
            item_name: record.item_name.clone(),
            label: y,
            vector: x.clone(),
        });
    }
    let meta = CheckpointMeta {
        increments_applied: checkpoint.meta.increments_applied + 1,
        ..checkpoint.meta.clone()
    };
    Ok(IncrementOutcome {
        checkpoint: Checkpoint::new(params, checkpoint.vectorizer.clone(), meta)?,
        new_count: new.len(),
        replayed_count,
    })
}

/// Fresh initialization and full training on everything seen so far, with
/// the deployed vectorizer kept fixed.
pub fn full_retrain_baseline(
    current: &Checkpoint,
    all_records: &[DishRecord],
    opts: &PipelineOptions,
) -> Result<TrainedModel> {
    let opts = PipelineOptions {
        include_ingredients: current.meta.include_ingredients,
        ..opts.clone()
    };
    let mut trained =
        pipeline::train_with_vectorizer(current.vectorizer.clone(), all_records, &opts)?;
    trained.checkpoint.meta.increments_applied = current.meta.increments_applied;
    Ok(trained)
}
