//! Two-phase forgetting experiment: learn keyword family A, then absorb a
//! batch from a disjoint family B under each update strategy.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::buffer::{ReplayBuffer, ReplayItem, DEFAULT_CAPACITY};
use super::increment::{full_retrain_baseline, increment, IncrementConfig, Strategy};
use super::report::{forgetting_report, ForgettingReport};
use crate::corpus::{generate_synthetic, split, DishRecord, KeywordRules, VocabProfile};
use crate::error::Result;
use crate::pipeline::{self, PipelineOptions};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoPhaseConfig {
    pub phase_a_n: usize,
    pub phase_b_n: usize,
    pub train_ratio: f64,
    pub buffer_capacity: usize,
    pub seed: u64,
    pub pipeline: PipelineOptions,
    pub increment: IncrementConfig,
    pub profile: VocabProfile,
    /// Veg share of the phase-B batch; `None` keeps the profile's share.
    pub phase_b_veg_fraction: Option<f64>,
    pub full_retrain: bool,
}

impl Default for TwoPhaseConfig {
    fn default() -> Self {
        Self {
            phase_a_n: 4000,
            phase_b_n: 500,
            train_ratio: 0.8,
            buffer_capacity: DEFAULT_CAPACITY,
            seed: 0,
            pipeline: PipelineOptions::default(),
            increment: IncrementConfig::default(),
            profile: VocabProfile::default(),
            phase_b_veg_fraction: Some(0.2),
            full_retrain: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseResult {
    pub seed: u64,
    pub phase_a_train_size: usize,
    pub phase_a_test_size: usize,
    pub phase_a_runtime_ms: u64,
    pub replay: ForgettingReport,
    pub naive: ForgettingReport,
    pub full_retrain: Option<ForgettingReport>,
}

fn millis(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}

/// Runs the protocol for one seed. Both strategies start from the same
/// phase-A checkpoint and buffer. The vectorizer is fitted once on phase-A
/// training names together with the phase-B names so the new family is
/// representable under the frozen vocabulary.
pub fn run_two_phase(rules: &KeywordRules, config: &TwoPhaseConfig) -> Result<TwoPhaseResult> {
    let s = config.seed;
    let (family_a, family_b) = rules.split_families()?;
    let corpus_a = generate_synthetic(config.phase_a_n, s, &family_a, &config.profile)?;
    let profile_b = VocabProfile {
        veg_fraction: config
            .phase_b_veg_fraction
            .unwrap_or(config.profile.veg_fraction),
        ..config.profile.clone()
    };
    let corpus_b = generate_synthetic(
        config.phase_b_n,
        seed::derive(s, seed::stream::INCREMENT),
        &family_b,
        &profile_b,
    )?;
    let (train_a, test_a) = split(&corpus_a, config.train_ratio, s)?;

    let include = config.pipeline.include_ingredients;
    let mut vocab_docs: Vec<DishRecord> = train_a.records.clone();
    vocab_docs.extend(corpus_b.records.iter().cloned());
    let vectorizer = pipeline::fit_vectorizer(&vocab_docs, include, config.pipeline.max_features)?;

    let mut opts = config.pipeline.clone();
    opts.train.seed = s;
    let started = Instant::now();
    let trained = pipeline::train_with_vectorizer(vectorizer, &train_a.records, &opts)?;
    let phase_a_runtime_ms = millis(started);
    let base = trained.checkpoint;

    let mut buffer = ReplayBuffer::new(config.buffer_capacity, s)?;
    let seen = pipeline::vectorize(&base.vectorizer, &train_a.records, include)?;
    for (record, (x, y)) in train_a.records.iter().zip(seen.iter()) {
        buffer.add(ReplayItem {
            item_name: record.item_name.clone(),
            label: y,
            vector: x.clone(),
        });
    }

    let inc = IncrementConfig {
        seed: s,
        ..config.increment.clone()
    };
    let run = |strategy: Strategy| -> Result<ForgettingReport> {
        let mut buf = buffer.clone();
        let started = Instant::now();
        let out = increment(&base, &mut buf, &corpus_b.records, strategy, &inc)?;
        let runtime_ms = millis(started);
        let mut report = forgetting_report(
            &base,
            &out.checkpoint,
            &test_a.records,
            strategy,
            out.new_count,
        )?
        .with_new_items(&base, &out.checkpoint, &corpus_b.records)?;
        report.seed = s;
        report.replayed_count = out.replayed_count;
        report.runtime_ms = runtime_ms;
        Ok(report)
    };
    let replay = run(Strategy::Replay)?;
    let naive = run(Strategy::Naive)?;

    let full_retrain = if config.full_retrain {
        let mut all = train_a.records.clone();
        all.extend(corpus_b.records.iter().cloned());
        let started = Instant::now();
        let retrained = full_retrain_baseline(&base, &all, &opts)?;
        let runtime_ms = millis(started);
        let mut report = forgetting_report(
            &base,
            &retrained.checkpoint,
            &test_a.records,
            Strategy::FullRetrain,
            corpus_b.len(),
        )?
        .with_new_items(&base, &retrained.checkpoint, &corpus_b.records)?;
        report.seed = s;
        report.runtime_ms = runtime_ms;
        Some(report)
    } else {
        None
    };

    Ok(TwoPhaseResult {
        seed: s,
        phase_a_train_size: train_a.len(),
        phase_a_test_size: test_a.len(),
        phase_a_runtime_ms,
        replay,
        naive,
        full_retrain,
    })
}
