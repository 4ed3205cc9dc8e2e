//! Confusion counts, scalar classification metrics and multi-run summaries.
//! The positive class is Veg (label 1).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    /// The same predictions viewed with Non-Veg as the positive class.
    pub fn flipped(&self) -> Self {
        Self {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_labels(pred: &[u8], truth: &[u8]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions but {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    if let Some(&bad) = pred.iter().chain(truth).find(|&&l| l > 1) {
        return Err(Error::InvalidInput(format!("label {bad} is not 0 or 1")));
    }
    Ok(())
}

pub fn confusion(pred: &[u8], truth: &[u8]) -> Result<ConfusionMatrix> {
    check_labels(pred, truth)?;
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (1, 1) => cm.tp += 1,
            (1, _) => cm.fp += 1,
            (_, 1) => cm.fn_ += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

pub fn accuracy(pred: &[u8], truth: &[u8]) -> Result<f64> {
    check_labels(pred, truth)?;
    if pred.is_empty() {
        return Err(Error::Empty("accuracy of zero samples".into()));
    }
    let correct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// Mean absolute error over hard labels.
pub fn mae(pred: &[u8], truth: &[u8]) -> Result<f64> {
    check_labels(pred, truth)?;
    if pred.is_empty() {
        return Err(Error::Empty("MAE of zero samples".into()));
    }
    let wrong = pred.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(wrong as f64 / pred.len() as f64)
}

/// Mann–Whitney AUC with average ranks for tied scores.
pub fn auc(scores: &[f64], truth: &[u8]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores but {} labels",
            scores.len(),
            truth.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let pos = truth.iter().filter(|&&t| t == 1).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass("AUC undefined with one class".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their average.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum_pos += avg * order[i..=j].iter().filter(|&&k| truth[k] == 1).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// O(P·N) pair counting with ties worth one half; the oracle for [`auc`].
pub fn auc_brute_force(scores: &[f64], truth: &[u8]) -> Result<f64> {
    let pos: Vec<f64> = scores
        .iter()
        .zip(truth)
        .filter(|(_, &t)| t == 1)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f64> = scores
        .iter()
        .zip(truth)
        .filter(|(_, &t)| t != 1)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClass("AUC undefined with one class".into()));
    }
    let mut wins = 0.0;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos.len() * neg.len()) as f64)
}

/// The seven reported metrics for one evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub accuracy: f64,
    pub loss: f64,
    pub mae: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
}

pub const METRIC_NAMES: [&str; 7] = [
    "accuracy",
    "loss",
    "mae",
    "precision",
    "recall",
    "f1",
    "auc",
];

impl MetricReport {
    /// Builds a report from hard labels and ranking scores; `loss` defaults
    /// to the MAE when `None`.
    pub fn compute(pred: &[u8], scores: &[f64], truth: &[u8], loss: Option<f64>) -> Result<Self> {
        let cm = confusion(pred, truth)?;
        let mae = mae(pred, truth)?;
        Ok(Self {
            accuracy: accuracy(pred, truth)?,
            loss: loss.unwrap_or(mae),
            mae,
            precision: cm.precision(),
            recall: cm.recall(),
            f1: cm.f1(),
            auc: auc(scores, truth)?,
            confusion: cm,
        })
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let values = [
            self.accuracy,
            self.loss,
            self.mae,
            self.precision,
            self.recall,
            self.f1,
            self.auc,
        ];
        METRIC_NAMES
            .iter()
            .map(|k| k.to_string())
            .zip(values)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub runs: usize,
    pub metrics: BTreeMap<String, MeanStd>,
}

/// Mean and sample standard deviation (divisor n−1; 0 for one sample).
pub fn mean_std(values: &[f64]) -> MeanStd {
    // Identical samples are reported exactly, without rounding residue.
    if let Some(&first) = values.first() {
        if values.iter().all(|&v| v == first) {
            return MeanStd {
                mean: first,
                std: 0.0,
            };
        }
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MeanStd { mean, std }
}

pub fn aggregate_runs(runs: &[BTreeMap<String, f64>]) -> Result<RunSummary> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Empty("no runs to aggregate".into()))?;
    for (i, r) in runs.iter().enumerate() {
        if !r.keys().eq(first.keys()) {
            return Err(Error::InvalidInput(format!(
                "run {i} has different metric keys"
            )));
        }
    }
    let metrics = first
        .keys()
        .map(|k| {
            let values: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            (k.clone(), mean_std(&values))
        })
        .collect();
    Ok(RunSummary {
        runs: runs.len(),
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIG6: ConfusionMatrix = ConfusionMatrix {
        tp: 12496,
        fp: 451,
        fn_: 100,
        tn: 12145,
    };

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[1, 1, 0, 0], &[1, 1, 0, 0]).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix {
                tp: 2,
                fp: 0,
                fn_: 0,
                tn: 2
            }
        );
        let inv = confusion(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(
            inv,
            ConfusionMatrix {
                tp: 0,
                fp: 2,
                fn_: 2,
                tn: 0
            }
        );
        assert!(confusion(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn reported_confusion_arithmetic() {
        assert!((FIG6.precision() - 0.965166).abs() < 1e-6);
        assert!((FIG6.recall() - 0.992061).abs() < 1e-6);
        assert!((FIG6.f1() - 0.978429).abs() < 1e-6);
    }

    #[test]
    fn zero_conventions() {
        let cm = ConfusionMatrix {
            tp: 0,
            fp: 3,
            fn_: 2,
            tn: 5,
        };
        assert_eq!((cm.precision(), cm.recall(), cm.f1()), (0.0, 0.0, 0.0));
        let cm = ConfusionMatrix {
            tp: 3,
            fp: 1,
            fn_: 1,
            tn: 0,
        };
        assert!((cm.f1() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn accuracy_and_mae() {
        assert_eq!(accuracy(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap(), 1.0);
        assert_eq!(mae(&[1, 0, 1, 0], &[1, 0, 1, 0]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 0, 1, 1], &[1, 0, 1, 0]).unwrap(), 0.75);
        assert_eq!(mae(&[1, 0, 1, 1], &[1, 0, 1, 0]).unwrap(), 0.25);
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn auc_examples() {
        let s = [0.9, 0.8, 0.85, 0.7];
        let y = [1, 1, 0, 0];
        assert!((auc(&s, &y).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(auc(&[0.9, 0.8, 0.1, 0.2], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 6], &[1, 0, 1, 0, 1, 0]).unwrap(), 0.5);
        assert!(matches!(
            auc(&[0.1, 0.2], &[1, 1]),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn aggregation() {
        let run = |v: f64| BTreeMap::from([("accuracy".to_string(), v)]);
        let s = aggregate_runs(&[run(0.98), run(0.98), run(0.98)]).unwrap();
        assert!((s.metrics["accuracy"].mean - 0.98).abs() < 1e-15);
        assert!(s.metrics["accuracy"].std.abs() < 1e-15);
        let s = aggregate_runs(&[run(0.96), run(1.00)]).unwrap();
        assert!((s.metrics["accuracy"].mean - 0.98).abs() < 1e-15);
        assert!((s.metrics["accuracy"].std - 0.028284).abs() < 1e-6);
        assert_eq!(
            aggregate_runs(&[run(0.5)]).unwrap().metrics["accuracy"].std,
            0.0
        );
        let other = BTreeMap::from([("f1".to_string(), 0.5)]);
        assert!(aggregate_runs(&[run(0.5), other]).is_err());
        assert!(aggregate_runs(&[]).is_err());
    }

    fn labels_and_scores() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (5usize..200).prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..6).prop_map(|v| f64::from(v) / 5.0), n),
                prop::collection::vec(0u8..2, n),
            )
        })
    }

    proptest! {
        #[test]
        fn rank_auc_matches_pair_counting((s, y) in labels_and_scores()) {
            prop_assume!(y.contains(&0) && y.contains(&1));
            let a = auc(&s, &y).unwrap();
            let b = auc_brute_force(&s, &y).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn accuracy_plus_mae_is_one(
            pairs in prop::collection::vec((0u8..2, 0u8..2), 1..300)
        ) {
            let (p, t): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let a = accuracy(&p, &t).unwrap();
            prop_assert!((a + mae(&p, &t).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((confusion(&p, &t).unwrap().accuracy() - a).abs() < 1e-12);
        }

        #[test]
        fn f1_scale_invariant(tp in 0u64..500, fp in 0u64..500, fn_ in 0u64..500, tn in 0u64..500, k in 1u64..20) {
            let a = ConfusionMatrix { tp, fp, fn_, tn };
            let b = ConfusionMatrix { tp: tp * k, fp: fp * k, fn_: fn_ * k, tn: tn * k };
            prop_assert!((a.f1() - b.f1()).abs() < 1e-12);
        }

        #[test]
        fn flipping_labels_swaps_roles(
            pairs in prop::collection::vec((0u8..2, 0u8..2), 1..100)
        ) {
            let (p, t): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let flip = |v: &[u8]| v.iter().map(|x| 1 - x).collect::<Vec<u8>>();
            let cm = confusion(&p, &t).unwrap();
            let cf = confusion(&flip(&p), &flip(&t)).unwrap();
            prop_assert_eq!(cf, cm.flipped());
            prop_assert_eq!(cf.precision(), ratio(cm.tn, cm.tn + cm.fn_));
        }
    }
}
