//! On-disk state: the novelty queue, the append-only label log, the staging
//! set for the next increment, the replay buffer and the report history.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use contfood_core::continual::{ForgettingReport, ReplayBuffer, DEFAULT_CAPACITY};
use contfood_core::corpus::{self, Corpus, DishRecord, Label};
use contfood_core::nnet::{Checkpoint, EpochRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const QUEUE_FILE: &str = "queue.jsonl";
pub const LABELS_FILE: &str = "labels.jsonl";
pub const STAGING_FILE: &str = "staging.jsonl";
pub const BUFFER_FILE: &str = "buffer.json";
pub const REPORTS_FILE: &str = "reports.jsonl";
pub const HISTORY_FILE: &str = "history.json";
pub const OLD_TEST_FILE: &str = "old_test.jsonl";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueStatus {
    Pending,
    Labeled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub id: u64,
    pub item_name: String,
    pub probability: f64,
    pub flagged_reason: String,
    pub enqueued_at: String,
    pub status: QueueStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Human,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelEvent {
    /// Queue entry id; absent when a name was labeled without being queued.
    pub id: Option<u64>,
    pub item_name: String,
    pub label: Label,
    pub source: LabelSource,
    pub timestamp: String,
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> std::io::Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), i + 1),
            )
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Records in the corpus JSONL format (`{item_name, type, ingredients}`);
/// a missing or blank file is an empty list.
fn read_records(path: &Path) -> std::io::Result<Vec<DishRecord>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    corpus::read_jsonl(&bytes[..], &path.display().to_string())
        .map(|c| c.records)
        .map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}: {e}", path.display()),
            )
        })
}

fn write_records(path: &Path, records: &[DishRecord]) -> std::io::Result<()> {
    let mut buf = Vec::new();
    corpus::write_jsonl(&Corpus::new(records.to_vec(), ""), &mut buf)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
    write_atomic(path, &buf)
}

/// Replaces `path` atomically with the given lines.
fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

fn append_jsonl<T: Serialize>(path: &Path, item: &T) -> std::io::Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_vec(item)?;
    line.push(b'\n');
    f.write_all(&line)?;
    f.sync_data()
}

/// Everything mutable behind the single writer lock.
pub struct Store {
    dir: PathBuf,
    pub queue: Vec<QueueEntry>,
    pub staging: Vec<DishRecord>,
    pub buffer: ReplayBuffer,
    pub reports: Vec<ForgettingReport>,
    pub training_history: Vec<EpochRecord>,
    pub old_test: Vec<DishRecord>,
}

impl Store {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let buffer = match fs::read(dir.join(BUFFER_FILE)) {
            Ok(bytes) => ReplayBuffer::load(&bytes)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                ReplayBuffer::new(DEFAULT_CAPACITY, 0).expect("positive capacity")
            }
            Err(e) => return Err(e),
        };
        let training_history = match fs::read(dir.join(HISTORY_FILE)) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(Self {
            queue: read_jsonl(&dir.join(QUEUE_FILE))?,
            staging: read_records(&dir.join(STAGING_FILE))?,
            reports: read_jsonl(&dir.join(REPORTS_FILE))?,
            old_test: read_records(&dir.join(OLD_TEST_FILE))?,
            buffer,
            training_history,
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.dir.join(CHECKPOINT_FILE)
    }

    pub fn load_checkpoint(&self) -> Option<std::io::Result<Checkpoint>> {
        let path = self.checkpoint_path();
        if !path.exists() {
            return None;
        }
        Some(
            Checkpoint::read(&path)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())),
        )
    }

    pub fn next_id(&self) -> u64 {
        self.queue.iter().map(|e| e.id).max().map_or(1, |m| m + 1)
    }

    pub fn pending(&self) -> Vec<QueueEntry> {
        let mut out: Vec<QueueEntry> = self
            .queue
            .iter()
            .filter(|e| e.status == QueueStatus::Pending)
            .cloned()
            .collect();
        out.sort_by_key(|e| e.id);
        out
    }

    pub fn save_queue(&self) -> std::io::Result<()> {
        write_jsonl(&self.dir.join(QUEUE_FILE), &self.queue)
    }

    pub fn save_staging(&self) -> std::io::Result<()> {
        write_records(&self.dir.join(STAGING_FILE), &self.staging)
    }

    pub fn append_label(&self, event: &LabelEvent) -> std::io::Result<()> {
        append_jsonl(&self.dir.join(LABELS_FILE), event)
    }

    pub fn append_report(&self, report: &ForgettingReport) -> std::io::Result<()> {
        append_jsonl(&self.dir.join(REPORTS_FILE), report)
    }

    pub fn save_buffer(&self) -> std::io::Result<()> {
        write_atomic(&self.dir.join(BUFFER_FILE), &self.buffer.save())
    }

    pub fn save_checkpoint(&self, checkpoint: &Checkpoint) -> std::io::Result<()> {
        write_atomic(&self.checkpoint_path(), &checkpoint.save())
    }
}
