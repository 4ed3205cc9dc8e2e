//! Sorted sparse vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSparse", into = "RawSparse")]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct RawSparse {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl TryFrom<RawSparse> for SparseVector {
    type Error = Error;

    fn try_from(raw: RawSparse) -> Result<Self> {
        SparseVector::new(raw.dim, raw.entries)
    }
}

impl From<SparseVector> for RawSparse {
    fn from(v: SparseVector) -> Self {
        RawSparse {
            dim: v.dim,
            entries: v.entries,
        }
    }
}

impl SparseVector {
    /// Validates ordering, bounds and the no-zero rule.
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        for (k, &(i, v)) in entries.iter().enumerate() {
            if i >= dim {
                return Err(Error::InvalidInput(format!(
                    "sparse index {i} out of range for dim {dim}"
                )));
            }
            if k > 0 && entries[k - 1].0 >= i {
                return Err(Error::InvalidInput(
                    "sparse indices must be strictly increasing".into(),
                ));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "sparse value at index {i} must be finite and non-zero, got {v}"
                )));
            }
        }
        Ok(Self { dim, entries })
    }

    /// Builds from a dense slice, dropping zeros.
    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self {
            dim: values.len(),
            entries,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Value at `index` (zero when not stored).
    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(k) => self.entries[k].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    /// Squared Euclidean distance, computed over the union of supports.
    pub fn distance_sq(&self, other: &SparseVector) -> f64 {
        let mut acc = 0.0;
        self.merge_with(other, |a, b| {
            let d = a - b;
            acc += d * d;
        });
        acc
    }

    /// `self + lambda * (other - self)` over the union of supports.
    pub fn interpolate(&self, other: &SparseVector, lambda: f64) -> SparseVector {
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        self.merge_indexed(other, |i, a, b| {
            let v = a + lambda * (b - a);
            if v != 0.0 {
                entries.push((i, v));
            }
        });
        SparseVector {
            dim: self.dim,
            entries,
        }
    }

    /// Divides every entry by the L2 norm; zero vectors are returned as-is.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for e in &mut self.entries {
                e.1 /= n;
            }
        }
        self
    }

    fn merge_with(&self, other: &SparseVector, mut f: impl FnMut(f64, f64)) {
        self.merge_indexed(other, |_, a, b| f(a, b));
    }

    fn merge_indexed(&self, other: &SparseVector, mut f: impl FnMut(usize, f64, f64)) {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
                f(a[i].0, a[i].1, 0.0);
                i += 1;
            } else if i >= a.len() || b[j].0 < a[i].0 {
                f(b[j].0, 0.0, b[j].1);
                j += 1;
            } else {
                f(a[i].0, a[i].1, b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_entries() {
        assert!(SparseVector::new(3, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, vec![(2, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, vec![(3, 1.0)]).is_err());
        assert!(SparseVector::new(3, vec![(0, 0.0)]).is_err());
        assert!(SparseVector::new(3, vec![(0, f64::NAN)]).is_err());
    }

    #[test]
    fn midpoint_of_origin_and_ones() {
        let a = SparseVector::zeros(2);
        let b = SparseVector::new(2, vec![(0, 1.0), (1, 1.0)]).unwrap();
        assert_eq!(a.interpolate(&b, 0.5).to_dense(), vec![0.5, 0.5]);
        assert_eq!(a.interpolate(&b, 0.0), a);
    }

    fn dense_vec() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], 8)
    }

    proptest! {
        #[test]
        fn sparse_ops_match_dense(a in dense_vec(), b in dense_vec(), lambda in 0.0..1.0f64) {
            let (sa, sb) = (SparseVector::from_dense(&a), SparseVector::from_dense(&b));
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            prop_assert!((sa.dot(&sb) - dot).abs() < 1e-12);
            let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            prop_assert!((sa.distance_sq(&sb) - d2).abs() < 1e-12);
            let interp = sa.interpolate(&sb, lambda).to_dense();
            for k in 0..8 {
                prop_assert!((interp[k] - (a[k] + lambda * (b[k] - a[k]))).abs() < 1e-12);
            }
        }
    }
}
