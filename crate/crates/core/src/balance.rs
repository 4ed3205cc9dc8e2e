//! SMOTE oversampling in sparse feature space.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::SparseVector;

/// Rows with parallel 0/1 labels (1 = Veg).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    rows: Vec<SparseVector>,
    labels: Vec<u8>,
}

impl LabeledMatrix {
    pub fn new(rows: Vec<SparseVector>, labels: Vec<u8>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(first) = rows.first() {
            let dim = first.dim();
            if let Some(bad) = rows.iter().find(|r| r.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bad.dim(),
                });
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidInput(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { rows, labels })
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Feature dimension (0 for an empty matrix).
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, SparseVector::dim)
    }

    /// `(count of label 0, count of label 1)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn concat(&self, other: &LabeledMatrix) -> Result<LabeledMatrix> {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        LabeledMatrix::new(rows, labels)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SparseVector, u8)> {
        self.rows.iter().zip(self.labels.iter().copied())
    }
}

pub const DEFAULT_K: usize = 5;

/// Appends synthetic minority rows until both classes have equal counts.
///
/// Sample `s` draws from its own generator seeded by `(seed, s)`: a uniform
/// minority row, one of its `k` nearest minority neighbours (Euclidean,
/// ties to the lower row index), and an interpolation weight in `[0, 1)`.
pub fn smote(data: &LabeledMatrix, k: usize, seed: u64) -> Result<LabeledMatrix> {
    if k == 0 {
        return Err(Error::InvalidInput("SMOTE needs k >= 1".into()));
    }
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::SingleClass("SMOTE needs both classes".into()));
    }
    if neg == pos {
        return Ok(data.clone());
    }
    let minority_label = u8::from(pos < neg);
    let minority: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] == minority_label)
        .collect();
    if minority.len() < 2 {
        return Err(Error::InvalidInput(
            "SMOTE needs at least two minority rows".into(),
        ));
    }
    let k = k.min(minority.len() - 1);
    let deficit = neg.max(pos) - minority.len();

    let mut neighbours: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut out = data.clone();
    out.rows.reserve(deficit);
    out.labels.reserve(deficit);
    for s in 0..deficit {
        let mut rng = seed::rng_indexed(seed, seed::stream::SMOTE, s as u64);
        let a = rng.gen_range(0..minority.len());
        let nn = neighbours
            .entry(a)
            .or_insert_with(|| nearest(data, &minority, a, k));
        let b = nn[rng.gen_range(0..nn.len())];
        let lambda: f64 = rng.gen_range(0.0..1.0);
        let row = data.rows[minority[a]].interpolate(&data.rows[minority[b]], lambda);
        out.rows.push(row);
        out.labels.push(minority_label);
    }
    Ok(out)
}

/// Positions (within `minority`) of the `k` nearest neighbours of `minority[a]`.
fn nearest(data: &LabeledMatrix, minority: &[usize], a: usize, k: usize) -> Vec<usize> {
    let x = &data.rows[minority[a]];
    let mut dists: Vec<(f64, usize)> = minority
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != a)
        .map(|(j, &row)| (x.distance_sq(&data.rows[row]), j))
        .collect();
    dists.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SparseVector {
        SparseVector::from_dense(v)
    }

    #[test]
    fn balanced_input_unchanged() {
        let m = LabeledMatrix::new(vec![sv(&[1.0, 0.0]), sv(&[0.0, 1.0])], vec![0, 1]).unwrap();
        assert_eq!(smote(&m, 5, 1).unwrap(), m);
    }

    #[test]
    fn two_point_minority_interpolates_on_segment() {
        let m = LabeledMatrix::new(
            vec![
                sv(&[0.0, 0.0]),
                sv(&[1.0, 1.0]),
                sv(&[5.0, 0.0]),
                sv(&[5.0, 1.0]),
                sv(&[6.0, 0.0]),
            ],
            vec![1, 1, 0, 0, 0],
        )
        .unwrap();
        let out = smote(&m, 1, 9).unwrap();
        assert_eq!(out.class_counts(), (3, 3));
        let s = out.rows()[5].to_dense();
        assert!((s[0] - s[1]).abs() < 1e-15 && (0.0..=1.0).contains(&s[0]));
    }

    #[test]
    fn errors() {
        let single = LabeledMatrix::new(vec![sv(&[1.0]), sv(&[2.0])], vec![1, 1]).unwrap();
        assert!(matches!(smote(&single, 5, 0), Err(Error::SingleClass(_))));
        let lonely =
            LabeledMatrix::new(vec![sv(&[1.0]), sv(&[2.0]), sv(&[3.0])], vec![1, 0, 0]).unwrap();
        assert!(smote(&lonely, 5, 0).is_err());
        assert!(smote(&lonely, 0, 0).is_err());
    }

    #[test]
    fn matrix_validation() {
        assert!(LabeledMatrix::new(vec![sv(&[1.0])], vec![]).is_err());
        assert!(LabeledMatrix::new(vec![sv(&[1.0]), sv(&[1.0, 2.0])], vec![0, 1]).is_err());
        assert!(LabeledMatrix::new(vec![sv(&[1.0])], vec![2]).is_err());
    }
}
