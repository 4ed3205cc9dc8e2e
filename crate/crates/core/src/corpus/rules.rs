use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Label;
use crate::error::{Error, Result};
use crate::vectorizer::tokenize;

const DEFAULT_RULES: &str = include_str!("../../assets/default_rules.json");

/// Keyword cue lists for heuristic labeling.
///
/// Matching is token-exact against [`tokenize`] output, and a name holding
/// both kinds of cue is labeled non-veg.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RuleFile", into = "RuleFile")]
pub struct KeywordRules {
    veg_terms: BTreeSet<String>,
    nonveg_terms: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    veg_terms: Vec<String>,
    nonveg_terms: Vec<String>,
}

impl TryFrom<RuleFile> for KeywordRules {
    type Error = Error;

    fn try_from(f: RuleFile) -> Result<Self> {
        KeywordRules::new(f.veg_terms, f.nonveg_terms)
    }
}

impl From<KeywordRules> for RuleFile {
    fn from(r: KeywordRules) -> Self {
        RuleFile {
            veg_terms: r.veg_terms.into_iter().collect(),
            nonveg_terms: r.nonveg_terms.into_iter().collect(),
        }
    }
}

impl KeywordRules {
    pub fn new<I, J, S, T>(veg_terms: I, nonveg_terms: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let veg = validate_terms(veg_terms.into_iter().map(Into::into))?;
        let nonveg = validate_terms(nonveg_terms.into_iter().map(Into::into))?;
        if veg.is_empty() || nonveg.is_empty() {
            return Err(Error::InvalidRules(
                "both term lists must be non-empty".into(),
            ));
        }
        let overlap: Vec<_> = veg.intersection(&nonveg).cloned().collect();
        if !overlap.is_empty() {
            return Err(Error::InvalidRules(format!(
                "terms listed for both classes: {}",
                overlap.join(", ")
            )));
        }
        Ok(Self {
            veg_terms: veg,
            nonveg_terms: nonveg,
        })
    }

    /// The shipped rule set: the four classic cues per class plus an
    /// extended list of common South Asian and Western ingredients.
    pub fn default_rules() -> Self {
        Self::from_json(DEFAULT_RULES.as_bytes()).expect("bundled rule file is valid")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::InvalidRules(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rules serialize")
    }

    pub fn veg_terms(&self) -> &BTreeSet<String> {
        &self.veg_terms
    }

    pub fn nonveg_terms(&self) -> &BTreeSet<String> {
        &self.nonveg_terms
    }

    pub fn contains(&self, term: &str) -> bool {
        self.veg_terms.contains(term) || self.nonveg_terms.contains(term)
    }

    pub fn classify(&self, name: &str) -> Option<Label> {
        let tokens = tokenize(name);
        if tokens.iter().any(|t| self.nonveg_terms.contains(t)) {
            Some(Label::NonVeg)
        } else if tokens.iter().any(|t| self.veg_terms.contains(t)) {
            Some(Label::Veg)
        } else {
            None
        }
    }

    /// Splits both lists into two disjoint families by alternating position.
    pub fn split_families(&self) -> Result<(KeywordRules, KeywordRules)> {
        fn halves(set: &BTreeSet<String>) -> (Vec<String>, Vec<String>) {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (i, t) in set.iter().enumerate() {
                if i % 2 == 0 {
                    a.push(t.clone())
                } else {
                    b.push(t.clone())
                }
            }
            (a, b)
        }
        let (va, vb) = halves(&self.veg_terms);
        let (na, nb) = halves(&self.nonveg_terms);
        Ok((KeywordRules::new(va, na)?, KeywordRules::new(vb, nb)?))
    }
}

fn validate_terms(terms: impl Iterator<Item = String>) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for t in terms {
        let tokens = tokenize(&t);
        if tokens.len() != 1 || tokens[0] != t {
            return Err(Error::InvalidRules(format!(
                "term {t:?} is not a single lowercase token that survives tokenization"
            )));
        }
        out.insert(t);
    }
    Ok(out)
}
