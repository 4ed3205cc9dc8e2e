//! Fixed-capacity reservoir of past training examples.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::{Error, Result};
use crate::seed;
use crate::sparse::SparseVector;

pub const DEFAULT_CAPACITY: usize = 2000;
const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayItem {
    pub item_name: String,
    pub label: u8,
    pub vector: SparseVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    seed: u64,
    items_seen: u64,
    items: Vec<ReplayItem>,
}

#[derive(Serialize, Deserialize)]
struct BufferFile {
    format_version: u64,
    #[serde(flatten)]
    buffer: ReplayBuffer,
    crc32: u32,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidInput("buffer capacity must be >= 1".into()));
        }
        Ok(Self {
            capacity,
            seed,
            items_seen: 0,
            items: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[ReplayItem] {
        &self.items
    }

    /// Reservoir insertion. Draw `n` (0-based) is seeded by `(seed, n)`, so
    /// the buffer's contents depend only on the insertion sequence.
    pub fn add(&mut self, item: ReplayItem) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            let mut rng = seed::rng_indexed(self.seed, seed::stream::RESERVOIR, self.items_seen);
            let j = rng.gen_range(0..=self.items_seen);
            if (j as usize) < self.capacity {
                self.items[j as usize] = item;
            }
        }
        self.items_seen += 1;
    }

    /// `min(n, len)` distinct stored items chosen by `seed`, in slot order.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<&ReplayItem> {
        let n = n.min(self.items.len());
        let mut rng = seed::rng(seed, seed::stream::REPLAY_SAMPLE);
        let mut picks = index::sample(&mut rng, self.items.len(), n).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|i| &self.items[i]).collect()
    }

    pub fn save(&self) -> Vec<u8> {
        let crc32 = codec::crc32(&serde_json::to_vec(self).expect("buffer serializes"));
        serde_json::to_vec(&BufferFile {
            format_version: FORMAT_VERSION,
            buffer: self.clone(),
            crc32,
        })
        .expect("buffer serializes")
    }

    pub fn load(bytes: &[u8]) -> Result<Self> {
        let value = codec::check_format_version(bytes, FORMAT_VERSION)?;
        let file: BufferFile =
            serde_json::from_value(value).map_err(|e| Error::Corrupt(e.to_string()))?;
        let computed = codec::crc32(&serde_json::to_vec(&file.buffer)?);
        if computed != file.crc32 {
            return Err(Error::Checksum {
                stored: file.crc32,
                computed,
            });
        }
        let b = file.buffer;
        if b.capacity == 0 || b.items.len() > b.capacity || b.items.len() as u64 > b.items_seen {
            return Err(Error::Corrupt("buffer counters are inconsistent".into()));
        }
        Ok(b)
    }
}
