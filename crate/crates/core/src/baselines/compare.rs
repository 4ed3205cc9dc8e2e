//! Repeated-run comparison of the baselines against the network.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    train_knn, train_linear_svm, train_logreg, train_random_forest, BaselineModel, ForestConfig,
    LogRegConfig, SvmConfig,
};
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::metrics::{aggregate_runs, MeanStd, MetricReport, METRIC_NAMES};
use crate::nnet::{self, TrainConfig};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    RandomForest,
    LinearSvm,
    Knn,
    Mlp,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Logreg,
        ModelKind::RandomForest,
        ModelKind::LinearSvm,
        ModelKind::Knn,
        ModelKind::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::RandomForest => "random_forest",
            ModelKind::LinearSvm => "linear_svm",
            ModelKind::Knn => "knn",
            ModelKind::Mlp => "mlp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub runs: usize,
    pub seed: u64,
    pub models: Vec<ModelKind>,
    pub mlp: TrainConfig,
    pub logreg: LogRegConfig,
    pub svm: SvmConfig,
    pub knn_k: usize,
    pub forest: ForestConfig,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            runs: 3,
            seed: 0,
            models: ModelKind::ALL.to_vec(),
            mlp: TrainConfig::default(),
            logreg: LogRegConfig::default(),
            svm: SvmConfig::default(),
            knn_k: 5,
            forest: ForestConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub summary: BTreeMap<String, MeanStd>,
    pub runs: Vec<MetricReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub runs: usize,
    pub seed: u64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, model: ModelKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// One line per model: `model, <metric>_mean, <metric>_std, ...`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["model".to_string()];
        for m in METRIC_NAMES {
            header.push(format!("{m}_mean"));
            header.push(format!("{m}_std"));
        }
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![row.model.name().to_string()];
            for m in METRIC_NAMES {
                let s = row.summary[m];
                rec.push(format!("{}", s.mean));
                rec.push(format!("{}", s.std));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

fn run_one(
    kind: ModelKind,
    train: &LabeledMatrix,
    test: &LabeledMatrix,
    config: &CompareConfig,
    run_seed: u64,
) -> Result<MetricReport> {
    let truth = test.labels();
    if kind == ModelKind::Mlp {
        let cfg = TrainConfig {
            seed: run_seed,
            ..config.mlp.clone()
        };
        let outcome = nnet::train(train, &cfg)?;
        let mut pred = Vec::with_capacity(test.len());
        let mut scores = Vec::with_capacity(test.len());
        for x in test.rows() {
            let (label, p) = nnet::predict(&outcome.params, x, cfg.threshold)?;
            pred.push(label);
            scores.push(p);
        }
        let loss = nnet::evaluate(&outcome.params, test, cfg.l2_lambda, cfg.threshold)?.loss;
        return MetricReport::compute(&pred, &scores, truth, Some(loss));
    }
    let model = match kind {
        ModelKind::Logreg => BaselineModel::Logreg(train_logreg(train, &config.logreg, run_seed)?),
        ModelKind::LinearSvm => {
            BaselineModel::LinearSvm(train_linear_svm(train, &config.svm, run_seed)?)
        }
        ModelKind::Knn => BaselineModel::Knn(train_knn(train, config.knn_k)?),
        ModelKind::RandomForest => {
            BaselineModel::RandomForest(train_random_forest(train, &config.forest, run_seed)?)
        }
        ModelKind::Mlp => unreachable!(),
    };
    let (pred, scores) = model.predict_all(test)?;
    MetricReport::compute(&pred, &scores, truth, None)
}

/// Trains every model `runs` times (run `r` uses `derive_indexed(seed, RUN, r)`)
/// and summarizes test metrics as mean ± sample std. Baseline loss is the
/// MAE; the network's loss is its cross-entropy plus L2 objective.
pub fn compare_all(
    train: &LabeledMatrix,
    test: &LabeledMatrix,
    config: &CompareConfig,
    jobs: usize,
) -> Result<ComparisonTable> {
    if config.runs == 0 {
        return Err(Error::InvalidInput("runs must be >= 1".into()));
    }
    if config.models.is_empty() {
        return Err(Error::InvalidInput("no models selected".into()));
    }
    config.mlp.validate()?;
    let tasks: Vec<(ModelKind, usize)> = config
        .models
        .iter()
        .flat_map(|&m| (0..config.runs).map(move |r| (m, r)))
        .collect();
    let exec = |&(kind, r): &(ModelKind, usize)| {
        let run_seed = seed::derive_indexed(config.seed, seed::stream::RUN, r as u64);
        run_one(kind, train, test, config, run_seed)
    };
    let results: Vec<Result<MetricReport>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(exec).collect())
    } else {
        tasks.iter().map(exec).collect()
    };
    let mut results = results.into_iter();
    let mut rows = Vec::new();
    for &model in &config.models {
        let runs: Vec<MetricReport> = results.by_ref().take(config.runs).collect::<Result<_>>()?;
        let maps: Vec<_> = runs.iter().map(MetricReport::to_map).collect();
        let summary = aggregate_runs(&maps)?.metrics;
        rows.push(ComparisonRow {
            model,
            summary,
            runs,
        });
    }
    Ok(ComparisonTable {
        runs: config.runs,
        seed: config.seed,
        rows,
    })
}
