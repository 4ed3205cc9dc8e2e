//! Cosine k-nearest-neighbour vote through an inverted index.

use super::check_dim;
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Clone, Debug)]
pub struct Knn {
    k: usize,
    dim: usize,
    labels: Vec<u8>,
    /// feature → (row, normalized value)
    postings: Vec<Vec<(u32, f64)>>,
}

pub fn train_knn(data: &LabeledMatrix, k: usize) -> Result<Knn> {
    if data.is_empty() {
        return Err(Error::Empty("KNN needs stored rows".into()));
    }
    if k == 0 || k > data.len() {
        return Err(Error::InvalidInput(format!(
            "k must lie in 1..={}, got {k}",
            data.len()
        )));
    }
    let dim = data.dim();
    let mut postings = vec![Vec::new(); dim];
    for (r, x) in data.rows().iter().enumerate() {
        let norm = x.norm();
        if norm == 0.0 {
            continue;
        }
        for (j, v) in x.iter() {
            postings[j].push((r as u32, v / norm));
        }
    }
    Ok(Knn {
        k,
        dim,
        labels: data.labels().to_vec(),
        postings,
    })
}

impl Knn {
    pub fn k(&self) -> usize {
        self.k
    }

    /// Row indices of the `k` most similar stored rows, most similar first;
    /// equal similarities go to the lower index.
    pub fn neighbours(&self, x: &SparseVector) -> Result<Vec<usize>> {
        check_dim(self.dim, x)?;
        let mut sims = vec![0.0; self.labels.len()];
        let norm = x.norm();
        if norm > 0.0 {
            for (j, v) in x.iter() {
                for &(r, w) in &self.postings[j] {
                    sims[r as usize] += v / norm * w;
                }
            }
        }
        // Small sorted buffer of (similarity, index), best first.
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, &s) in sims.iter().enumerate() {
            if best.len() == self.k && s <= best[self.k - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(bs, _)| bs >= s);
            best.insert(pos, (s, i));
            best.truncate(self.k);
        }
        Ok(best.into_iter().map(|(_, i)| i).collect())
    }

    /// Fraction of Veg among the neighbours.
    pub fn score(&self, x: &SparseVector) -> Result<f64> {
        let nn = self.neighbours(x)?;
        let veg = nn.iter().filter(|&&i| self.labels[i] == 1).count();
        Ok(veg as f64 / nn.len() as f64)
    }

    /// Majority vote; an even split goes to Veg.
    pub fn predict(&self, x: &SparseVector) -> Result<u8> {
        Ok(u8::from(self.score(x)? >= 0.5))
    }
}
