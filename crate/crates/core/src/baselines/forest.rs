//! Bagged CART trees with Gini splits on sparse features.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, require_two_classes};
use crate::balance::LabeledMatrix;
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::SparseVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// `ceil(sqrt(d))` candidates per node.
    Sqrt,
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: Some(20),
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        veg_fraction: f64,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_fraction(&self, x: &SparseVector) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { veg_fraction } => return veg_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x.get(feature) <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.nodes.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct RandomForest {
    dim: usize,
    trees: Vec<Tree>,
}

impl RandomForest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Mean over trees of the leaf's Veg fraction.
    pub fn score(&self, x: &SparseVector) -> Result<f64> {
        check_dim(self.dim, x)?;
        let total: f64 = self.trees.iter().map(|t| t.leaf_fraction(x)).sum();
        Ok(total / self.trees.len() as f64)
    }

    /// Veg when the score reaches 0.5.
    pub fn predict(&self, x: &SparseVector) -> Result<u8> {
        Ok(u8::from(self.score(x)? >= 0.5))
    }
}

pub fn train_random_forest(
    data: &LabeledMatrix,
    config: &ForestConfig,
    seed: u64,
) -> Result<RandomForest> {
    require_two_classes(data)?;
    if config.n_trees == 0 {
        return Err(Error::InvalidInput("n_trees must be >= 1".into()));
    }
    let dim = data.dim();
    let n_candidates = match config.max_features {
        MaxFeatures::Sqrt => (dim as f64).sqrt().ceil() as usize,
        MaxFeatures::All => dim,
    }
    .max(1);
    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = seed::rng_indexed(seed, seed::stream::FOREST_TREE, t as u64);
            let sample: Vec<usize> = if config.bootstrap {
                (0..data.len())
                    .map(|_| rng.gen_range(0..data.len()))
                    .collect()
            } else {
                (0..data.len()).collect()
            };
            TreeBuilder::new(data, sample, n_candidates, config.max_depth, rng).build()
        })
        .collect();
    Ok(RandomForest { dim, trees })
}

struct TreeBuilder<'a> {
    data: &'a LabeledMatrix,
    /// Row index per sample slot (bootstrap duplicates allowed).
    sample: Vec<usize>,
    n_candidates: usize,
    max_depth: Option<usize>,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl<'a> TreeBuilder<'a> {
    fn new(
        data: &'a LabeledMatrix,
        sample: Vec<usize>,
        n_candidates: usize,
        max_depth: Option<usize>,
        rng: ChaCha8Rng,
    ) -> Self {
        Self {
            data,
            sample,
            n_candidates,
            max_depth,
            rng,
            nodes: Vec::new(),
        }
    }

    fn build(mut self) -> Tree {
        let slots: Vec<usize> = (0..self.sample.len()).collect();
        self.grow(slots, 0);
        Tree { nodes: self.nodes }
    }

    fn label(&self, slot: usize) -> u8 {
        self.data.labels()[self.sample[slot]]
    }

    fn row(&self, slot: usize) -> &'a SparseVector {
        &self.data.rows()[self.sample[slot]]
    }

    fn grow(&mut self, slots: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let pos = slots.iter().filter(|&&s| self.label(s) == 1).count();
        let n = slots.len();
        self.nodes.push(Node::Leaf {
            veg_fraction: pos as f64 / n as f64,
        });
        let depth_ok = self.max_depth.is_none_or(|d| depth < d);
        if pos == 0 || pos == n || n < 2 || !depth_ok {
            return id;
        }
        let Some(best) = self.best_split(&slots, pos) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = slots
            .into_iter()
            .partition(|&s| self.row(s).get(best.feature) <= best.threshold);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        id
    }

    /// Non-zero `(value, label)` pairs per feature over the node, keeping
    /// only features that take more than one value there.
    fn varying_features(&self, slots: &[usize]) -> Vec<(usize, Vec<(f64, u8)>)> {
        let mut seen: std::collections::BTreeMap<usize, Vec<(f64, u8)>> = Default::default();
        for &s in slots {
            let y = self.label(s);
            for (j, v) in self.row(s).iter() {
                seen.entry(j).or_default().push((v, y));
            }
        }
        seen.into_iter()
            .filter(|(_, vals)| {
                vals.len() < slots.len() || vals.iter().any(|&(v, _)| v != vals[0].0)
            })
            .collect()
    }

    fn best_split(&mut self, slots: &[usize], pos: usize) -> Option<Best> {
        let mut varying = self.varying_features(slots);
        if varying.is_empty() {
            return None;
        }
        let take = self.n_candidates.min(varying.len());
        let picks = index::sample(&mut self.rng, varying.len(), take);
        let n = slots.len();
        let parent = gini(pos, n);
        let mut best: Option<Best> = None;
        for p in picks.iter() {
            let feature = varying[p].0;
            let values = &mut varying[p].1;
            let zero_n = n - values.len();
            let zero_pos = pos - values.iter().filter(|&&(_, y)| y == 1).count();
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            // Sweep thresholds at every distinct value; zeros form one block.
            let mut groups: Vec<(f64, usize, usize)> = Vec::new();
            let mut inserted_zero = zero_n == 0;
            for &(v, y) in values.iter() {
                if !inserted_zero && v > 0.0 {
                    groups.push((0.0, zero_n, zero_pos));
                    inserted_zero = true;
                }
                match groups.last_mut() {
                    Some(g) if g.0 == v => {
                        g.1 += 1;
                        g.2 += usize::from(y == 1);
                    }
                    _ => groups.push((v, 1, usize::from(y == 1))),
                }
            }
            if !inserted_zero {
                groups.push((0.0, zero_n, zero_pos));
            }
            let (mut ln, mut lp) = (0usize, 0usize);
            for &(v, gn, gp) in &groups[..groups.len().saturating_sub(1)] {
                ln += gn;
                lp += gp;
                let rn = n - ln;
                let rp = pos - lp;
                let child = (ln as f64 * gini(lp, ln) + rn as f64 * gini(rp, rn)) / n as f64;
                let gain = parent - child;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Best {
                        feature,
                        threshold: v,
                        gain,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> SparseVector {
        SparseVector::from_dense(v)
    }

    #[test]
    fn one_perfect_feature_depth_one() {
        let data = LabeledMatrix::new(
            vec![
                sv(&[0.9, 0.1]),
                sv(&[0.8, 0.3]),
                sv(&[0.0, 0.2]),
                sv(&[0.0, 0.4]),
            ],
            vec![1, 1, 0, 0],
        )
        .unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: Some(1),
            max_features: MaxFeatures::All,
            bootstrap: false,
        };
        let f = train_random_forest(&data, &cfg, 0).unwrap();
        for (x, y) in data.iter() {
            assert_eq!(f.predict(x).unwrap(), y);
        }
    }

    #[test]
    fn pure_bootstrap_gives_single_leaf() {
        // One Veg row among many: some bootstraps miss it entirely.
        let mut rows = vec![sv(&[1.0, 0.0])];
        let mut labels = vec![1];
        for i in 0..30 {
            rows.push(sv(&[0.0, 1.0 + i as f64]));
            labels.push(0);
        }
        let data = LabeledMatrix::new(rows, labels).unwrap();
        let f = train_random_forest(
            &data,
            &ForestConfig {
                n_trees: 20,
                ..Default::default()
            },
            4,
        )
        .unwrap();
        let leaf = f
            .trees()
            .iter()
            .find(|t| t.is_leaf())
            .expect("some pure bootstrap");
        assert_eq!(leaf.leaf_fraction(&sv(&[1.0, 0.0])), 0.0);
    }

    #[test]
    fn unlimited_tree_fits_consistent_data() {
        let rows: Vec<SparseVector> = (0..40)
            .map(|i| {
                sv(&[
                    (i % 5) as f64,
                    (i % 7) as f64 * 0.5,
                    if i % 3 == 0 { 1.0 } else { 0.0 },
                ])
            })
            .collect();
        let labels: Vec<u8> = (0..40)
            .map(|i| u8::from((i % 5 + i % 7) % 2 == 0))
            .collect();
        let data = LabeledMatrix::new(rows, labels).unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: None,
            max_features: MaxFeatures::All,
            bootstrap: false,
        };
        let f = train_random_forest(&data, &cfg, 1).unwrap();
        for (x, y) in data.iter() {
            assert_eq!(f.predict(x).unwrap(), y);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let rows: Vec<SparseVector> = (0..30)
            .map(|i| sv(&[(i % 4) as f64, (i % 3) as f64]))
            .collect();
        let labels: Vec<u8> = (0..30).map(|i| u8::from(i % 4 > 1)).collect();
        let data = LabeledMatrix::new(rows, labels).unwrap();
        let cfg = ForestConfig {
            n_trees: 5,
            ..Default::default()
        };
        let a = train_random_forest(&data, &cfg, 8).unwrap();
        let b = train_random_forest(&data, &cfg, 8).unwrap();
        for x in data.rows() {
            assert_eq!(a.score(x).unwrap().to_bits(), b.score(x).unwrap().to_bits());
        }
    }
}
