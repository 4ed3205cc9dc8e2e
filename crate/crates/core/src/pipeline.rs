//! Glue between records, features and models: vectorize, balance, train,
//! and evaluate in the order every command uses.

use serde::{Deserialize, Serialize};

use crate::balance::{smote, LabeledMatrix, DEFAULT_K};
use crate::corpus::{Corpus, DishRecord};
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::nnet::{self, Checkpoint, CheckpointMeta, TrainConfig, TrainOutcome};
use crate::vectorizer::{self, TfidfModel, DEFAULT_MAX_FEATURES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineOptions {
    pub include_ingredients: bool,
    pub max_features: usize,
    pub smote: bool,
    pub smote_k: usize,
    pub train: TrainConfig,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            include_ingredients: false,
            max_features: DEFAULT_MAX_FEATURES,
            smote: true,
            smote_k: DEFAULT_K,
            train: TrainConfig::default(),
        }
    }
}

/// Labels as 0/1, failing on the first unlabeled records.
pub fn labels_of(records: &[DishRecord]) -> Result<Vec<u8>> {
    let missing: Vec<String> = records
        .iter()
        .filter(|r| r.label.is_none())
        .map(|r| r.item_name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Unlabeled(missing));
    }
    Ok(records
        .iter()
        .map(|r| r.label.expect("checked").as_u8())
        .collect())
}

pub fn fit_vectorizer(
    records: &[DishRecord],
    include_ingredients: bool,
    max_features: usize,
) -> Result<TfidfModel> {
    let docs: Vec<String> = records
        .iter()
        .map(|r| r.feature_text(include_ingredients))
        .collect();
    vectorizer::fit(&docs, max_features)
}

pub fn vectorize(
    model: &TfidfModel,
    records: &[DishRecord],
    include_ingredients: bool,
) -> Result<LabeledMatrix> {
    let labels = labels_of(records)?;
    let rows = records
        .iter()
        .map(|r| model.transform(&r.feature_text(include_ingredients)))
        .collect();
    LabeledMatrix::new(rows, labels)
}

/// Vectorizes labeled records and, when enabled, balances them with SMOTE
/// seeded by the training seed.
pub fn training_matrix(
    model: &TfidfModel,
    records: &[DishRecord],
    opts: &PipelineOptions,
) -> Result<LabeledMatrix> {
    let data = vectorize(model, records, opts.include_ingredients)?;
    if opts.smote {
        smote(&data, opts.smote_k, opts.train.seed)
    } else {
        Ok(data)
    }
}

pub struct TrainedModel {
    pub checkpoint: Checkpoint,
    pub outcome: TrainOutcome,
}

/// Fresh training on `records` with an already-fitted vectorizer.
pub fn train_with_vectorizer(
    model: TfidfModel,
    records: &[DishRecord],
    opts: &PipelineOptions,
) -> Result<TrainedModel> {
    let data = training_matrix(&model, records, opts)?;
    let outcome = nnet::train(&data, &opts.train)?;
    let checkpoint = Checkpoint::new(
        outcome.params.clone(),
        model,
        CheckpointMeta {
            include_ingredients: opts.include_ingredients,
            threshold: opts.train.threshold,
            ..Default::default()
        },
    )?;
    Ok(TrainedModel {
        checkpoint,
        outcome,
    })
}

/// Fit vectorizer → vectorize → SMOTE → train.
pub fn train_pipeline(train: &Corpus, opts: &PipelineOptions) -> Result<TrainedModel> {
    train.require_labeled()?;
    let model = fit_vectorizer(&train.records, opts.include_ingredients, opts.max_features)?;
    train_with_vectorizer(model, &train.records, opts)
}

/// `(labels, probabilities)` of a checkpoint over records.
pub fn predict_records(
    checkpoint: &Checkpoint,
    records: &[DishRecord],
) -> Result<(Vec<u8>, Vec<f64>)> {
    let mut labels = Vec::with_capacity(records.len());
    let mut probs = Vec::with_capacity(records.len());
    for r in records {
        let (l, p) = checkpoint.classify(&r.feature_text(checkpoint.meta.include_ingredients))?;
        labels.push(l);
        probs.push(p);
    }
    Ok((labels, probs))
}

pub fn accuracy_on(checkpoint: &Checkpoint, records: &[DishRecord]) -> Result<f64> {
    let truth = labels_of(records)?;
    let (pred, _) = predict_records(checkpoint, records)?;
    crate::metrics::accuracy(&pred, &truth)
}

/// Test-set metrics; the loss column is the network objective with `lambda`.
pub fn evaluate_checkpoint(
    checkpoint: &Checkpoint,
    test: &[DishRecord],
    lambda: f64,
) -> Result<MetricReport> {
    let data = vectorize(
        &checkpoint.vectorizer,
        test,
        checkpoint.meta.include_ingredients,
    )?;
    let (pred, probs) = predict_records(checkpoint, test)?;
    let loss = nnet::evaluate(&checkpoint.params, &data, lambda, checkpoint.meta.threshold)?.loss;
    MetricReport::compute(&pred, &probs, data.labels(), Some(loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn toy_corpus(n: usize) -> Corpus {
        let records = (0..n)
            .map(|i| {
                let (name, label) = if i % 2 == 0 {
                    (format!("alpha dish{}", i % 5), Label::Veg)
                } else {
                    (format!("omega dish{}", i % 5), Label::NonVeg)
                };
                DishRecord::labeled(name, label).unwrap()
            })
            .collect();
        Corpus::new(records, "toy")
    }

    #[test]
    fn two_term_toy_reaches_full_training_accuracy() {
        let corpus = toy_corpus(60);
        let opts = PipelineOptions {
            train: TrainConfig {
                max_epochs: 50,
                ..Default::default()
            },
            ..Default::default()
        };
        let trained = train_pipeline(&corpus, &opts).unwrap();
        let last = trained.outcome.history.last().unwrap();
        assert_eq!(last.train_accuracy, 1.0);
        assert_eq!(
            accuracy_on(&trained.checkpoint, &corpus.records).unwrap(),
            1.0
        );
    }

    #[test]
    fn unlabeled_records_rejected() {
        let mut corpus = toy_corpus(10);
        corpus.records[3].label = None;
        assert!(matches!(
            train_pipeline(&corpus, &PipelineOptions::default()),
            Err(Error::Unlabeled(names)) if names.len() == 1
        ));
    }
}
