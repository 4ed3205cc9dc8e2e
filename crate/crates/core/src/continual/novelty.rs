//! Flags names the model cannot place confidently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nnet::{predict_proba, Checkpoint};

pub const DEFAULT_TAU: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoveltyReason {
    LowConfidence,
    AllOov,
}

impl NoveltyReason {
    pub fn as_str(self) -> &'static str {
        match self {
            NoveltyReason::LowConfidence => "low_confidence",
            NoveltyReason::AllOov => "all_oov",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoveltyVerdict {
    pub item_name: String,
    pub flagged: bool,
    pub reason: Option<NoveltyReason>,
    pub probability: f64,
    pub label: u8,
}

/// All-OOV names are always flagged; otherwise flagged iff `|p − 0.5| < τ`.
pub fn detect_novel(checkpoint: &Checkpoint, item_name: &str, tau: f64) -> Result<NoveltyVerdict> {
    if !(0.0..0.5).contains(&tau) {
        return Err(Error::InvalidInput(format!(
            "tau must lie in [0, 0.5), got {tau}"
        )));
    }
    let x = checkpoint.transform(item_name);
    let probability = predict_proba(&checkpoint.params, &x)?;
    let reason = if x.is_zero() {
        Some(NoveltyReason::AllOov)
    } else if (probability - 0.5).abs() < tau {
        Some(NoveltyReason::LowConfidence)
    } else {
        None
    };
    Ok(NoveltyVerdict {
        item_name: item_name.to_string(),
        flagged: reason.is_some(),
        reason,
        probability,
        label: u8::from(probability >= checkpoint.meta.threshold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnet::{CheckpointMeta, MlpParams};
    use crate::vectorizer;

    fn checkpoint(params: MlpParams) -> Checkpoint {
        let v = vectorizer::fit(&["paneer tikka", "chicken curry"], 8).unwrap();
        Checkpoint::new(params, v, CheckpointMeta::default()).unwrap()
    }

    #[test]
    fn all_oov_is_flagged() {
        let c = checkpoint(MlpParams::init(8, 4, 2, 1));
        let v = detect_novel(&c, "Zzyzx Quux", 0.15).unwrap();
        assert!(v.flagged);
        assert_eq!(v.reason, Some(NoveltyReason::AllOov));
        assert!(c.transform("Zzyzx Quux").is_zero());
    }

    #[test]
    fn half_probability_is_flagged_for_any_positive_tau() {
        let c = checkpoint(MlpParams::zeros(8, 4, 2));
        for tau in [1e-9, 0.15, 0.49] {
            let v = detect_novel(&c, "paneer tikka", tau).unwrap();
            assert_eq!(v.probability, 0.5);
            assert_eq!(v.reason, Some(NoveltyReason::LowConfidence));
        }
    }

    #[test]
    fn confident_prediction_not_flagged() {
        let mut p = MlpParams::zeros(8, 4, 2);
        // Push the output bias so that sigmoid(b3) ≈ 0.99.
        p.layers[2].b[0] = (0.99f64 / 0.01).ln();
        let c = checkpoint(p);
        let v = detect_novel(&c, "chicken curry", 0.15).unwrap();
        assert!((v.probability - 0.99).abs() < 1e-12);
        assert!(!v.flagged);
        assert_eq!(v.reason, None);
    }

    #[test]
    fn tau_out_of_range() {
        let c = checkpoint(MlpParams::zeros(8, 4, 2));
        assert!(detect_novel(&c, "paneer", 0.5).is_err());
        assert!(detect_novel(&c, "paneer", -0.1).is_err());
    }
}
