//! Self-contained model artifact: network weights plus the frozen vectorizer.

use serde::{Deserialize, Serialize};

use super::params::{predict, Dense, MlpParams};
use crate::codec;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::vectorizer::{TfidfFile, TfidfModel};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    /// RFC 3339 timestamp; excluded from [`Checkpoint::content_hash`].
    pub created_at: String,
    pub increments_applied: u64,
    pub include_ingredients: bool,
    pub threshold: f64,
}

impl Default for CheckpointMeta {
    fn default() -> Self {
        Self {
            created_at: String::new(),
            increments_applied: 0,
            include_ingredients: false,
            threshold: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: MlpParams,
    pub vectorizer: TfidfModel,
    pub meta: CheckpointMeta,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    w_b64: String,
    b_b64: String,
}

#[derive(Serialize, Deserialize)]
struct Payload {
    format_version: u64,
    created_at: String,
    increments_applied: u64,
    include_ingredients: bool,
    threshold: f64,
    vectorizer: TfidfFile,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    #[serde(flatten)]
    payload: Payload,
    crc32: u32,
}

impl Checkpoint {
    pub fn new(params: MlpParams, vectorizer: TfidfModel, meta: CheckpointMeta) -> Result<Self> {
        if params.input_dim() != vectorizer.dim() {
            return Err(Error::DimensionMismatch {
                expected: vectorizer.dim(),
                found: params.input_dim(),
            });
        }
        Ok(Self {
            params,
            vectorizer,
            meta,
        })
    }

    fn payload(&self) -> Payload {
        Payload {
            format_version: FORMAT_VERSION,
            created_at: self.meta.created_at.clone(),
            increments_applied: self.meta.increments_applied,
            include_ingredients: self.meta.include_ingredients,
            threshold: self.meta.threshold,
            vectorizer: self.vectorizer.to_file(),
            layers: self
                .params
                .layers
                .iter()
                .map(|l| LayerFile {
                    rows: l.rows,
                    cols: l.cols,
                    w_b64: codec::encode_f64s(&l.w),
                    b_b64: codec::encode_f64s(&l.b),
                })
                .collect(),
        }
    }

    pub fn save(&self) -> Vec<u8> {
        let payload = self.payload();
        let crc32 = codec::crc32(&serde_json::to_vec(&payload).expect("payload serializes"));
        serde_json::to_vec(&CheckpointFile { payload, crc32 }).expect("checkpoint serializes")
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let value = codec::check_format_version(bytes, FORMAT_VERSION)?;
        let file: CheckpointFile =
            serde_json::from_value(value).map_err(|e| Error::Corrupt(e.to_string()))?;
        let computed = codec::crc32(&serde_json::to_vec(&file.payload)?);
        if computed != file.crc32 {
            return Err(Error::Checksum {
                stored: file.crc32,
                computed,
            });
        }
        let p = file.payload;
        let vectorizer = TfidfModel::from_file(p.vectorizer)?;
        let layers = p
            .layers
            .into_iter()
            .map(|l| {
                let w = codec::decode_f64s(&l.w_b64)?;
                let b = codec::decode_f64s(&l.b_b64)?;
                if w.len() != l.rows * l.cols || b.len() != l.cols {
                    return Err(Error::Corrupt(format!(
                        "layer {}x{} has {} weights and {} biases",
                        l.rows,
                        l.cols,
                        w.len(),
                        b.len()
                    )));
                }
                Ok(Dense {
                    rows: l.rows,
                    cols: l.cols,
                    w,
                    b,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let params = MlpParams::from_layers(layers)?;
        params.check_finite()?;
        Self::new(
            params,
            vectorizer,
            CheckpointMeta {
                created_at: p.created_at,
                increments_applied: p.increments_applied,
                include_ingredients: p.include_ingredients,
                threshold: p.threshold,
            },
        )
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::load(&std::fs::read(path)?)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.save())?;
        Ok(())
    }

    /// SHA-256 of the saved form with `created_at` blanked, so two runs that
    /// differ only in wall-clock time hash identically.
    pub fn content_hash(&self) -> String {
        let mut copy = self.clone();
        copy.meta.created_at.clear();
        codec::sha256_hex(&copy.save())
    }

    pub fn vocabulary_hash(&self) -> String {
        self.vectorizer.vocabulary_hash()
    }

    pub fn transform(&self, text: &str) -> SparseVector {
        self.vectorizer.transform(text)
    }

    /// `(label, probability)` for a raw dish name.
    pub fn classify(&self, text: &str) -> Result<(u8, f64)> {
        predict(&self.params, &self.transform(text), self.meta.threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorizer;
    use rand::{Rng, SeedableRng};

    fn sample() -> Checkpoint {
        let docs = ["paneer tikka", "chicken curry", "veg salad", "beef stew"];
        let v = vectorizer::fit(&docs, 16).unwrap();
        let params = MlpParams::init(16, 8, 4, 3);
        Checkpoint::new(
            params,
            v,
            CheckpointMeta {
                created_at: "2026-01-01T00:00:00Z".into(),
                increments_applied: 2,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let bytes = c.save();
        let back = Checkpoint::load(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.save(), bytes);
    }

    #[test]
    fn corrupted_weights_fail_checksum() {
        let c = sample();
        let text = String::from_utf8(c.save()).unwrap();
        let start = text.find("\"w_b64\":\"").unwrap() + 9;
        let mut bytes = text.into_bytes();
        bytes[start] = if bytes[start] == b'A' { b'B' } else { b'A' };
        assert!(matches!(
            Checkpoint::load(&bytes),
            Err(Error::Checksum { .. })
        ));
    }

    #[test]
    fn foreign_version_rejected() {
        let mut v: serde_json::Value = serde_json::from_slice(&sample().save()).unwrap();
        v["format_version"] = 2.into();
        let bytes = serde_json::to_vec(&v).unwrap();
        assert!(matches!(
            Checkpoint::load(&bytes),
            Err(Error::Version {
                found: 2,
                expected: 1
            })
        ));
    }

    #[test]
    fn reloaded_model_predicts_identically() {
        let docs: Vec<String> = (0..40).map(|i| format!("term{i} word{}", i % 7)).collect();
        let v = vectorizer::fit(&docs, 64).unwrap();
        let c = Checkpoint::new(
            MlpParams::init(64, 64, 32, 11),
            v,
            CheckpointMeta::default(),
        )
        .unwrap();
        let back = Checkpoint::load(&c.save()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let dense: Vec<f64> = (0..64)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        rng.gen_range(-1.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let x = SparseVector::from_dense(&dense);
            let a = predict(&c.params, &x, 0.5).unwrap();
            let b = predict(&back.params, &x, 0.5).unwrap();
            assert_eq!(a.0, b.0);
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn content_hash_ignores_timestamp() {
        let a = sample();
        let mut b = a.clone();
        b.meta.created_at = "2030-05-05T00:00:00Z".into();
        assert_eq!(a.content_hash(), b.content_hash());
        b.meta.increments_applied += 1;
        assert_ne!(a.content_hash(), b.content_hash());
    }
}
