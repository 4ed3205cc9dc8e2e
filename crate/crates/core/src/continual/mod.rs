//! Learning after deployment: flag unfamiliar dishes, fold labeled ones back
//! in with warm-start fine-tuning plus experience replay, and measure how
//! much the old test set suffers.

mod buffer;
mod experiment;
mod increment;
mod novelty;
mod report;

pub use buffer::{ReplayBuffer, ReplayItem, DEFAULT_CAPACITY};
pub use experiment::{run_two_phase, TwoPhaseConfig, TwoPhaseResult};
pub use increment::{
    full_retrain_baseline, increment, IncrementConfig, IncrementOutcome, Strategy,
};
pub use novelty::{detect_novel, NoveltyReason, NoveltyVerdict, DEFAULT_TAU};
pub use report::{forgetting_report, ForgettingReport};
