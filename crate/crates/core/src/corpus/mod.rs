//! Dish records, heuristic labeling, deduplication and splitting.

mod io;
mod rules;
mod synth;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub use io::{ingest, read_csv, read_jsonl, write_corpus, write_csv, write_jsonl, Format};
pub use rules::KeywordRules;
pub use synth::{generate_synthetic, VocabProfile};

/// Binary dish category. Veg is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Veg,
    NonVeg,
}

impl Label {
    pub fn as_u8(self) -> u8 {
        match self {
            Label::Veg => 1,
            Label::NonVeg => 0,
        }
    }

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            1 => Some(Label::Veg),
            0 => Some(Label::NonVeg),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Label::Veg => "veg",
            Label::NonVeg => "nonveg",
        }
    }

    /// Parses the `type` column token; `Ok(None)` for an empty field.
    pub fn parse_token(raw: &str) -> Result<Option<Label>> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "" => Ok(None),
            "veg" => Ok(Some(Label::Veg)),
            "nonveg" => Ok(Some(Label::NonVeg)),
            other => Err(Error::InvalidInput(format!(
                "unknown type token {other:?} (allowed: veg, nonveg, empty)"
            ))),
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DishRecord {
    pub item_name: String,
    pub label: Option<Label>,
    pub ingredients: Vec<String>,
}

impl DishRecord {
    pub fn new(
        item_name: impl Into<String>,
        label: Option<Label>,
        ingredients: Vec<String>,
    ) -> Result<Self> {
        let item_name = item_name.into();
        if item_name.trim().is_empty() {
            return Err(Error::InvalidInput("item_name must not be empty".into()));
        }
        Ok(Self {
            item_name,
            label,
            ingredients,
        })
    }

    pub fn labeled(item_name: impl Into<String>, label: Label) -> Result<Self> {
        Self::new(item_name, Some(label), Vec::new())
    }

    /// Text fed to the vectorizer: the name, optionally followed by ingredients.
    pub fn feature_text(&self, include_ingredients: bool) -> String {
        if include_ingredients && !self.ingredients.is_empty() {
            format!("{} {}", self.item_name, self.ingredients.join(" "))
        } else {
            self.item_name.clone()
        }
    }
}

/// Case-folded, whitespace-collapsed name used for duplicate detection.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub records: Vec<DishRecord>,
    pub source: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutolabelCounts {
    pub veg: usize,
    pub nonveg: usize,
    pub unmatched: usize,
    pub already_labeled: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub veg: usize,
    pub nonveg: usize,
    pub unlabeled: usize,
}

impl Corpus {
    pub fn new(records: Vec<DishRecord>, source: impl Into<String>) -> Self {
        Self {
            records,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for r in &self.records {
            match r.label {
                Some(Label::Veg) => c.veg += 1,
                Some(Label::NonVeg) => c.nonveg += 1,
                None => c.unlabeled += 1,
            }
        }
        c
    }

    /// Errors with the offending names if any record lacks a label.
    pub fn require_labeled(&self) -> Result<()> {
        let missing: Vec<String> = self
            .records
            .iter()
            .filter(|r| r.label.is_none())
            .map(|r| r.item_name.clone())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Unlabeled(missing))
        }
    }
}

/// Labels every unlabeled record by keyword match. Non-veg cues win.
pub fn autolabel(corpus: &Corpus, rules: &KeywordRules) -> (Corpus, AutolabelCounts) {
    let mut counts = AutolabelCounts::default();
    let records = corpus
        .records
        .iter()
        .map(|r| {
            let mut out = r.clone();
            if r.label.is_some() {
                counts.already_labeled += 1;
                return out;
            }
            out.label = rules.classify(&r.item_name);
            match out.label {
                Some(Label::Veg) => counts.veg += 1,
                Some(Label::NonVeg) => counts.nonveg += 1,
                None => counts.unmatched += 1,
            }
            out
        })
        .collect();
    (Corpus::new(records, corpus.source.clone()), counts)
}

/// Drops records whose normalized name repeats an earlier one.
pub fn dedupe(corpus: &Corpus) -> Corpus {
    let mut seen = HashSet::new();
    let records = corpus
        .records
        .iter()
        .filter(|r| seen.insert(normalize_name(&r.item_name)))
        .cloned()
        .collect();
    Corpus::new(records, corpus.source.clone())
}

/// Seeded shuffle followed by a `floor(ratio * n)` train prefix.
pub fn split(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    corpus.require_labeled()?;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut seed::rng(seed, seed::stream::SPLIT));
    let n_train = (ratio * corpus.len() as f64).floor() as usize;
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus.records[i].clone()).collect();
    Ok((
        Corpus::new(pick(&order[..n_train]), format!("{}#train", corpus.source)),
        Corpus::new(pick(&order[n_train..]), format!("{}#test", corpus.source)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(c: &Corpus) -> Vec<&str> {
        c.records.iter().map(|r| r.item_name.as_str()).collect()
    }

    fn unlabeled(names: &[&str]) -> Corpus {
        Corpus::new(
            names
                .iter()
                .map(|n| DishRecord::new(*n, None, vec![]).unwrap())
                .collect(),
            "test",
        )
    }

    fn labeled(n: usize) -> Corpus {
        Corpus::new(
            (0..n)
                .map(|i| {
                    let l = if i % 2 == 0 {
                        Label::Veg
                    } else {
                        Label::NonVeg
                    };
                    DishRecord::labeled(format!("dish {i}"), l).unwrap()
                })
                .collect(),
            "test",
        )
    }

    #[test]
    fn autolabel_keyword_cues() {
        let rules = KeywordRules::default_rules();
        let c = unlabeled(&[
            "Tofu Salad",
            "Beef Stew",
            "Chicken Salad",
            "Fishcake Roll",
            "Mystery Bowl",
        ]);
        let (out, counts) = autolabel(&c, &rules);
        let labels: Vec<_> = out.records.iter().map(|r| r.label).collect();
        assert_eq!(
            labels,
            vec![
                Some(Label::Veg),
                Some(Label::NonVeg),
                Some(Label::NonVeg),
                None,
                None
            ]
        );
        assert_eq!(
            counts,
            AutolabelCounts {
                veg: 1,
                nonveg: 2,
                unmatched: 2,
                already_labeled: 0
            }
        );
    }

    #[test]
    fn autolabel_leaves_labeled_records() {
        let rules = KeywordRules::default_rules();
        let mut c = unlabeled(&["Chicken Tikka"]);
        c.records[0].label = Some(Label::Veg);
        let (out, counts) = autolabel(&c, &rules);
        assert_eq!(out.records[0].label, Some(Label::Veg));
        assert_eq!(counts.already_labeled, 1);
    }

    #[test]
    fn dedupe_examples() {
        assert_eq!(
            names(&dedupe(&unlabeled(&["Dosa", "dosa ", "Idli"]))),
            vec!["Dosa", "Idli"]
        );
        let c = unlabeled(&["A", "B", "C"]);
        assert_eq!(dedupe(&c), c);
        assert_eq!(
            names(&dedupe(&unlabeled(&["A", "B", "A", "B", "A"]))),
            vec!["A", "B"]
        );
        assert_eq!(
            names(&dedupe(&unlabeled(&["Palak  Paneer", "palak paneer"]))),
            vec!["Palak  Paneer"]
        );
    }

    #[test]
    fn split_sizes() {
        let (tr, te) = split(&labeled(10), 0.8, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let (tr, te) = split(&labeled(25_192), 0.8, 7).unwrap();
        assert_eq!((tr.len(), te.len()), (20_153, 5_039));
    }

    #[test]
    fn split_is_deterministic() {
        let c = labeled(50);
        assert_eq!(split(&c, 0.8, 3).unwrap(), split(&c, 0.8, 3).unwrap());
        assert_ne!(split(&c, 0.8, 3).unwrap().0, split(&c, 0.8, 4).unwrap().0);
    }

    #[test]
    fn split_rejects_unlabeled_and_bad_ratio() {
        let mut c = labeled(4);
        c.records[2].label = None;
        match split(&c, 0.5, 0) {
            Err(Error::Unlabeled(names)) => assert_eq!(names, vec!["dish 2".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(split(&labeled(4), 1.0, 0).is_err());
        assert!(split(&labeled(4), 0.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions(n in 1usize..300, ratio in 0.01f64..0.99, seed in any::<u64>()) {
            let c = labeled(n);
            let (tr, te) = split(&c, ratio, seed).unwrap();
            prop_assert_eq!(tr.len(), (ratio * n as f64).floor() as usize);
            prop_assert_eq!(tr.len() + te.len(), n);
            let mut all: Vec<&str> = names(&tr).into_iter().chain(names(&te)).collect();
            all.sort();
            let mut orig = names(&c);
            orig.sort();
            prop_assert_eq!(all, orig);
        }

        #[test]
        fn autolabel_is_idempotent(picks in proptest::collection::vec(0usize..8, 1..20)) {
            let pool = ["Tofu Salad", "Beef Stew", "Chicken Salad", "Plain Rice", "Fish Fry", "Lentil Soup", "Egg Curry", "Toast"];
            let c = unlabeled(&picks.iter().map(|&i| pool[i]).collect::<Vec<_>>());
            let rules = KeywordRules::default_rules();
            let (once, _) = autolabel(&c, &rules);
            let (twice, _) = autolabel(&once, &rules);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn dedupe_leaves_unique_names(picks in proptest::collection::vec(0usize..6, 0..30)) {
            let pool = ["Dosa", "dosa", " DOSA ", "Idli", "idli  ", "Vada"];
            let c = unlabeled(&picks.iter().map(|&i| pool[i]).collect::<Vec<_>>());
            let out = dedupe(&c);
            let mut seen = HashSet::new();
            for r in &out.records {
                prop_assert!(seen.insert(normalize_name(&r.item_name)));
            }
        }
    }
}
