//! Tokenization and TF-IDF features over a capped, frozen vocabulary.
//!
//! Weights are raw in-document counts times the smoothed inverse document
//! frequency `ln((1 + N) / (1 + df)) + 1`, and every output row is
//! L2-normalized. Output vectors always have `max_features` dimensions, so
//! the downstream network keeps a fixed input width regardless of how many
//! terms the fitted vocabulary holds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

pub const DEFAULT_MAX_FEATURES: usize = 5000;
pub const FORMAT_VERSION: u64 = 1;

const STOPWORDS_EN_V1: &str = include_str!("../assets/stopwords_en_v1.txt");

struct StopList {
    id: String,
    words: HashSet<&'static str>,
}

static STOP_LIST: LazyLock<StopList> = LazyLock::new(|| {
    let words = STOPWORDS_EN_V1
        .lines()
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .collect();
    let digest = codec::sha256_hex(STOPWORDS_EN_V1.as_bytes());
    StopList {
        id: format!("en-v1:{}", &digest[..16]),
        words,
    }
});

/// Identifier of the bundled stop list, including a content hash prefix.
pub fn stop_list_id() -> &'static str {
    &STOP_LIST.id
}

pub fn is_stop_word(token: &str) -> bool {
    STOP_LIST.words.contains(token)
}

/// Lowercases, splits on every non-alphanumeric character, and drops
/// tokens shorter than two characters or on the stop list. Order and
/// duplicates are kept.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !is_stop_word(t))
        .map(String::from)
        .collect()
}

/// A fitted TF-IDF model. Immutable after [`fit`].
#[derive(Clone, Debug, PartialEq)]
pub struct TfidfModel {
    terms: Vec<String>,
    term_index: HashMap<String, usize>,
    doc_freq: Vec<u64>,
    idf: Vec<f64>,
    n_docs: u64,
    max_features: usize,
    stop_list_id: String,
}

pub fn smoothed_idf(n_docs: u64, df: u64) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fits a vocabulary of at most `max_features` terms.
///
/// Terms are ranked by total raw count across `docs`, ties broken
/// lexicographically; columns are then assigned in lexicographic order.
pub fn fit<S: AsRef<str>>(docs: &[S], max_features: usize) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::Empty("cannot fit TF-IDF on zero documents".into()));
    }
    if max_features == 0 {
        return Err(Error::InvalidInput("max_features must be positive".into()));
    }
    let mut total: HashMap<String, u64> = HashMap::new();
    let mut df: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        let tokens = tokenize(doc.as_ref());
        let mut seen = HashSet::new();
        for t in tokens {
            if seen.insert(t.clone()) {
                *df.entry(t.clone()).or_default() += 1;
            }
            *total.entry(t).or_default() += 1;
        }
    }
    if total.is_empty() {
        return Err(Error::Empty("every document tokenized to nothing".into()));
    }

    let mut ranked: Vec<(String, u64)> = total.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_features);
    let mut terms: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
    terms.sort();

    let n_docs = docs.len() as u64;
    let doc_freq: Vec<u64> = terms.iter().map(|t| df[t]).collect();
    let idf = doc_freq.iter().map(|&d| smoothed_idf(n_docs, d)).collect();
    Ok(TfidfModel::from_parts(
        terms,
        doc_freq,
        idf,
        n_docs,
        max_features,
        stop_list_id().to_string(),
    ))
}

impl TfidfModel {
    fn from_parts(
        terms: Vec<String>,
        doc_freq: Vec<u64>,
        idf: Vec<f64>,
        n_docs: u64,
        max_features: usize,
        stop_list_id: String,
    ) -> Self {
        let term_index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            terms,
            term_index,
            doc_freq,
            idf,
            n_docs,
            max_features,
            stop_list_id,
        }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn vocab_size(&self) -> usize {
        self.terms.len()
    }

    /// Dimensionality of every transformed vector.
    pub fn dim(&self) -> usize {
        self.max_features
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn stop_list_id(&self) -> &str {
        &self.stop_list_id
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<u64> {
        self.index_of(term).map(|i| self.doc_freq[i])
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.index_of(term).map(|i| self.idf[i])
    }

    pub fn idf_values(&self) -> &[f64] {
        &self.idf
    }

    /// Count × idf over in-vocabulary tokens, L2-normalized. Texts with no
    /// in-vocabulary token map to the zero vector.
    pub fn transform(&self, text: &str) -> SparseVector {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for t in tokenize(text) {
            if let Some(&i) = self.term_index.get(&t) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, c)| (i, c as f64 * self.idf[i]))
            .collect();
        SparseVector::new(self.max_features, entries)
            .expect("ordered positive entries")
            .normalized()
    }

    /// SHA-256 over the canonical payload; equal hashes mean equal features.
    pub fn vocabulary_hash(&self) -> String {
        codec::sha256_hex(&serde_json::to_vec(&self.payload()).expect("payload serializes"))
    }

    pub(crate) fn payload(&self) -> TfidfPayload {
        TfidfPayload {
            format_version: FORMAT_VERSION,
            n_docs: self.n_docs,
            max_features: self.max_features,
            stop_list_id: self.stop_list_id.clone(),
            terms: self.terms.clone(),
            doc_freq: self.doc_freq.clone(),
            idf_b64: codec::encode_f64s(&self.idf),
        }
    }

    pub(crate) fn to_file(&self) -> TfidfFile {
        let payload = self.payload();
        let crc32 = codec::crc32(&serde_json::to_vec(&payload).expect("payload serializes"));
        TfidfFile { payload, crc32 }
    }

    pub(crate) fn from_file(file: TfidfFile) -> Result<Self> {
        let p = file.payload;
        if p.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                found: p.format_version,
                expected: FORMAT_VERSION,
            });
        }
        let computed = codec::crc32(&serde_json::to_vec(&p)?);
        if computed != file.crc32 {
            return Err(Error::Checksum {
                stored: file.crc32,
                computed,
            });
        }
        let idf = codec::decode_f64s(&p.idf_b64)?;
        if idf.len() != p.terms.len() || p.doc_freq.len() != p.terms.len() {
            return Err(Error::Corrupt(
                "terms, doc_freq and idf lengths differ".into(),
            ));
        }
        if p.terms.len() > p.max_features {
            return Err(Error::Corrupt("vocabulary exceeds max_features".into()));
        }
        Ok(Self::from_parts(
            p.terms,
            p.doc_freq,
            idf,
            p.n_docs,
            p.max_features,
            p.stop_list_id,
        ))
    }

    pub fn save(&self) -> Vec<u8> {
        serde_json::to_vec(&self.to_file()).expect("model serializes")
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let value = codec::check_format_version(bytes, FORMAT_VERSION)?;
        let file: TfidfFile =
            serde_json::from_value(value).map_err(|e| Error::Corrupt(e.to_string()))?;
        Self::from_file(file)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct TfidfPayload {
    format_version: u64,
    n_docs: u64,
    max_features: usize,
    stop_list_id: String,
    terms: Vec<String>,
    doc_freq: Vec<u64>,
    idf_b64: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct TfidfFile {
    #[serde(flatten)]
    payload: TfidfPayload,
    crc32: u32,
}
