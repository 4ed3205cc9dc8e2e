//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded from a
//! user seed mixed with a stream tag (and optionally an index) through
//! SplitMix64. Streams derived from different tags are independent, so
//! consuming one never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Values are part of the reproducibility contract; never reorder.
pub mod stream {
    pub const SPLIT: u64 = 1;
    pub const SYNTH: u64 = 2;
    pub const SMOTE: u64 = 3;
    pub const INIT: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const VALIDATION: u64 = 6;
    pub const GRID: u64 = 7;
    pub const REPLAY_SAMPLE: u64 = 8;
    pub const RESERVOIR: u64 = 9;
    pub const BASELINE: u64 = 10;
    pub const FOREST_TREE: u64 = 11;
    pub const RUN: u64 = 12;
    pub const INCREMENT: u64 = 13;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a stream tag.
pub fn derive(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Derives a child seed from `seed`, a stream tag and an index within that stream.
pub fn derive_indexed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(derive(seed, tag) ^ splitmix64(index.wrapping_add(0xA5A5_A5A5)))
}

pub fn rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, tag))
}

pub fn rng_indexed(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_indexed(seed, tag, index))
}
