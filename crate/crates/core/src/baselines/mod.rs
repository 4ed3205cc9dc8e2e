//! Comparison classifiers over the same TF-IDF features. Every model gives a
//! hard label and a ranking score where higher means more Veg.

mod compare;
mod forest;
mod knn;
mod logreg;
mod svm;

use serde::{Deserialize, Serialize};

pub use compare::{compare_all, CompareConfig, ComparisonRow, ComparisonTable, ModelKind};
pub use forest::{train_random_forest, ForestConfig, MaxFeatures, RandomForest};
pub use knn::{train_knn, Knn};
pub use logreg::{train_logreg, LogRegConfig, LogisticRegression};
pub use svm::{train_linear_svm, LinearSvm, SvmConfig};

use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Logreg,
    LinearSvm,
    Knn,
    RandomForest,
}

#[derive(Clone, Debug)]
pub enum BaselineModel {
    Logreg(LogisticRegression),
    LinearSvm(LinearSvm),
    Knn(Knn),
    RandomForest(RandomForest),
}

impl BaselineModel {
    pub fn kind(&self) -> BaselineKind {
        match self {
            Self::Logreg(_) => BaselineKind::Logreg,
            Self::LinearSvm(_) => BaselineKind::LinearSvm,
            Self::Knn(_) => BaselineKind::Knn,
            Self::RandomForest(_) => BaselineKind::RandomForest,
        }
    }

    pub fn score(&self, x: &SparseVector) -> Result<f64> {
        match self {
            Self::Logreg(m) => m.score(x),
            Self::LinearSvm(m) => m.score(x),
            Self::Knn(m) => m.score(x),
            Self::RandomForest(m) => m.score(x),
        }
    }

    pub fn predict(&self, x: &SparseVector) -> Result<u8> {
        match self {
            Self::Logreg(m) => m.predict(x),
            Self::LinearSvm(m) => m.predict(x),
            Self::Knn(m) => m.predict(x),
            Self::RandomForest(m) => m.predict(x),
        }
    }

    /// `(labels, scores)` for every row of `data`.
    pub fn predict_all(&self, data: &LabeledMatrix) -> Result<(Vec<u8>, Vec<f64>)> {
        let mut labels = Vec::with_capacity(data.len());
        let mut scores = Vec::with_capacity(data.len());
        for x in data.rows() {
            labels.push(self.predict(x)?);
            scores.push(self.score(x)?);
        }
        Ok((labels, scores))
    }
}

pub(crate) fn require_two_classes(data: &LabeledMatrix) -> Result<()> {
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass("training data has one class".into()));
    }
    Ok(())
}

pub(crate) fn check_dim(expected: usize, x: &SparseVector) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.dim(),
        });
    }
    Ok(())
}
