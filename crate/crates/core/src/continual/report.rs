//! Old-test accuracy before and after an update.

use serde::{Deserialize, Serialize};

use super::increment::Strategy;
use crate::corpus::DishRecord;
use crate::error::{Error, Result};
use crate::nnet::Checkpoint;
use crate::pipeline::accuracy_on;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgettingReport {
    pub old_test_accuracy_before: f64,
    pub old_test_accuracy_after: f64,
    /// `before − after`.
    pub accuracy_drop: f64,
    pub new_items_count: usize,
    pub strategy: Strategy,
    pub created_at: String,
    pub seed: u64,
    /// Accuracy on the new items themselves, before and after learning them.
    pub new_items_accuracy_before: Option<f64>,
    pub new_items_accuracy_after: Option<f64>,
    #[serde(default)]
    pub replayed_count: usize,
    #[serde(default)]
    pub runtime_ms: u64,
    #[serde(default)]
    pub increments_applied: u64,
}

pub fn forgetting_report(
    before: &Checkpoint,
    after: &Checkpoint,
    old_test: &[DishRecord],
    strategy: Strategy,
    new_count: usize,
) -> Result<ForgettingReport> {
    let (hb, ha) = (before.vocabulary_hash(), after.vocabulary_hash());
    if hb != ha {
        return Err(Error::VocabularyMismatch(hb, ha));
    }
    let acc_before = accuracy_on(before, old_test)?;
    let acc_after = accuracy_on(after, old_test)?;
    Ok(ForgettingReport {
        old_test_accuracy_before: acc_before,
        old_test_accuracy_after: acc_after,
        accuracy_drop: acc_before - acc_after,
        new_items_count: new_count,
        strategy,
        created_at: after.meta.created_at.clone(),
        seed: 0,
        new_items_accuracy_before: None,
        new_items_accuracy_after: None,
        replayed_count: 0,
        runtime_ms: 0,
        increments_applied: after.meta.increments_applied,
    })
}

impl ForgettingReport {
    /// Fills the new-item accuracies from the two checkpoints.
    pub fn with_new_items(
        mut self,
        before: &Checkpoint,
        after: &Checkpoint,
        new_items: &[DishRecord],
    ) -> Result<Self> {
        self.new_items_accuracy_before = Some(accuracy_on(before, new_items)?);
        self.new_items_accuracy_after = Some(accuracy_on(after, new_items)?);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::nnet::{CheckpointMeta, MlpParams};
    use crate::vectorizer;

    fn ckpt(docs: &[&str]) -> Checkpoint {
        let v = vectorizer::fit(docs, 8).unwrap();
        Checkpoint::new(MlpParams::init(8, 4, 2, 0), v, CheckpointMeta::default()).unwrap()
    }

    fn old_test() -> Vec<DishRecord> {
        vec![
            DishRecord::labeled("paneer tikka", Label::Veg).unwrap(),
            DishRecord::labeled("chicken curry", Label::NonVeg).unwrap(),
        ]
    }

    #[test]
    fn identical_checkpoints_drop_nothing() {
        let c = ckpt(&["paneer tikka", "chicken curry"]);
        let r = forgetting_report(&c, &c, &old_test(), Strategy::Replay, 3).unwrap();
        assert_eq!(r.accuracy_drop, 0.0);
        assert_eq!(
            r.accuracy_drop,
            r.old_test_accuracy_before - r.old_test_accuracy_after
        );
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ForgettingReport>(&json).unwrap(), r);
    }

    #[test]
    fn vocabulary_mismatch_rejected() {
        let a = ckpt(&["paneer tikka", "chicken curry"]);
        let b = ckpt(&["tofu bowl", "beef stew"]);
        assert!(matches!(
            forgetting_report(&a, &b, &old_test(), Strategy::Naive, 1),
            Err(Error::VocabularyMismatch(..))
        ));
    }

    #[test]
    fn drop_arithmetic() {
        let r = ForgettingReport {
            old_test_accuracy_before: 0.98,
            old_test_accuracy_after: 0.95,
            accuracy_drop: 0.98 - 0.95,
            new_items_count: 1,
            strategy: Strategy::Naive,
            created_at: String::new(),
            seed: 0,
            new_items_accuracy_before: None,
            new_items_accuracy_after: None,
            replayed_count: 0,
            runtime_ms: 0,
            increments_applied: 1,
        };
        assert!((r.accuracy_drop - 0.03).abs() < 1e-12);
    }
}
