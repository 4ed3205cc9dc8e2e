//! The feedforward Veg/Non-Veg classifier: parameters, gradients, Adam,
//! early-stopped training, grid search and checkpoints.

mod adam;
mod checkpoint;
mod grid;
mod params;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, CheckpointMeta, FORMAT_VERSION};
pub use grid::{default_grid, grid_search, GridResult, GridRow};
pub use params::{
    backward, bce_term, forward, gradient_check, loss, predict, predict_proba, sigmoid, Cache,
    Dense, MlpParams, PROB_CLAMP, TENSOR_NAMES,
};
pub use train::{
    evaluate, run_with_early_stopping, train, train_fixed_epochs, validation_split, EarlyStopping,
    EpochRecord, Evaluation, LossKind, Optimizer, StopSummary, TrainConfig, TrainOutcome, Verdict,
};
