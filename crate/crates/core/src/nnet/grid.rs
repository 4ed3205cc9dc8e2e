//! Exhaustive search over training configurations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{train, TrainConfig, TrainOutcome};
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub index: usize,
    pub hidden: [usize; 2],
    pub l2_lambda: f64,
    pub seed: u64,
    pub best_epoch: usize,
    pub stopped_epoch: usize,
    pub best_val_loss: f64,
}

#[derive(Clone, Debug)]
pub struct GridResult {
    pub best_index: usize,
    /// The winning configuration with its derived seed filled in.
    pub best_config: TrainConfig,
    pub best_outcome: TrainOutcome,
    pub table: Vec<GridRow>,
}

/// Hidden sizes {(64,32), (32,16)} × λ {0.01, 0.001} around `base`.
pub fn default_grid(base: &TrainConfig) -> Vec<TrainConfig> {
    let mut grid = Vec::new();
    for hidden in [[64, 32], [32, 16]] {
        for l2_lambda in [0.01, 0.001] {
            grid.push(TrainConfig {
                hidden,
                l2_lambda,
                ..base.clone()
            });
        }
    }
    grid
}

/// Trains every config (config `i` gets seed `derive_indexed(seed, GRID, i)`)
/// and picks the lowest best-epoch validation loss, earliest index on ties.
/// `jobs > 1` trains in parallel; the result does not depend on scheduling.
pub fn grid_search(
    data: &LabeledMatrix,
    grid: &[TrainConfig],
    seed: u64,
    jobs: usize,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid is empty".into()));
    }
    for (i, c) in grid.iter().enumerate() {
        c.validate()
            .map_err(|e| Error::InvalidInput(format!("grid entry {i}: {e}")))?;
    }
    let configs: Vec<TrainConfig> = grid
        .iter()
        .enumerate()
        .map(|(i, c)| TrainConfig {
            seed: seed::derive_indexed(seed, seed::stream::GRID, i as u64),
            ..c.clone()
        })
        .collect();

    let outcomes: Vec<Result<TrainOutcome>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| configs.par_iter().map(|c| train(data, c)).collect())
    } else {
        configs.iter().map(|c| train(data, c)).collect()
    };

    let mut table = Vec::with_capacity(configs.len());
    let mut best: Option<(usize, TrainOutcome)> = None;
    for (i, (config, outcome)) in configs.iter().zip(outcomes).enumerate() {
        let outcome = outcome?;
        table.push(GridRow {
            index: i,
            hidden: config.hidden,
            l2_lambda: config.l2_lambda,
            seed: config.seed,
            best_epoch: outcome.best_epoch,
            stopped_epoch: outcome.stopped_epoch,
            best_val_loss: outcome.best_val_loss,
        });
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| outcome.best_val_loss < b.best_val_loss);
        if better {
            best = Some((i, outcome));
        }
    }
    let (best_index, best_outcome) = best.expect("grid is non-empty");
    Ok(GridResult {
        best_index,
        best_config: configs[best_index].clone(),
        best_outcome,
        table,
    })
}
