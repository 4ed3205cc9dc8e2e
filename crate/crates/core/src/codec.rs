//! Shared encoding helpers for the versioned JSON artifacts.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Base64 of the little-endian bytes of `values`.
pub fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    STANDARD.encode(bytes)
}

pub fn decode_f64s(encoded: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD
        .decode(encoded)
        .map_err(|e| Error::Corrupt(format!("base64: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Corrupt(format!(
            "float payload of {} bytes is not a multiple of 8",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads `format_version` from a raw JSON document before full decoding, so
/// a foreign version is reported as such rather than as a schema error.
pub fn check_format_version(bytes: &[u8], expected: u64) -> Result<serde_json::Value> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| Error::Corrupt(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Corrupt("missing format_version".into()))?;
    if found != expected {
        return Err(Error::Version { found, expected });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn f64_roundtrip_is_bit_exact(values in proptest::collection::vec(any::<f64>(), 0..64)) {
            let back = decode_f64s(&encode_f64s(&values)).unwrap();
            prop_assert_eq!(back.len(), values.len());
            for (a, b) in values.iter().zip(&back) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_ragged_payload() {
        let s = STANDARD.encode([1u8, 2, 3]);
        assert!(matches!(decode_f64s(&s), Err(Error::Corrupt(_))));
        assert!(matches!(
            decode_f64s("!!not base64"),
            Err(Error::Corrupt(_))
        ));
    }
}
