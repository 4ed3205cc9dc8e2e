//! Run manifests: what a command read, what it wrote, and with which
//! settings, so a run can be repeated and its artifacts compared by hash.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use contfood_core::codec::sha256_hex;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub config: Value,
    pub seeds: Vec<(String, u64)>,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    pub duration_ms: u64,
    pub created_at: String,
}

/// Timestamp for artifacts: `SOURCE_DATE_EPOCH` when set, else the clock.
pub fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    fixed
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn hash_file(path: &Path) -> Result<FileHash> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(FileHash {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Collects a manifest while a command runs.
pub struct Recorder {
    command: String,
    started: Instant,
    config: Value,
    seeds: Vec<(String, u64)>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            started: Instant::now(),
            config: Value::Null,
            seeds: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn config<T: Serialize>(&mut self, config: &T) -> &mut Self {
        self.config = serde_json::to_value(config).unwrap_or(Value::Null);
        self
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.push((name.to_string(), value));
        self
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.to_path_buf());
        self
    }

    /// Hashes every recorded file and writes the manifest to `path`.
    pub fn finish(&self, path: &Path) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.clone(),
            version: env!("CARGO_PKG_VERSION"),
            config: self.config.clone(),
            seeds: self.seeds.clone(),
            inputs: self
                .inputs
                .iter()
                .map(|p| hash_file(p))
                .collect::<Result<_>>()?,
            outputs: self
                .outputs
                .iter()
                .map(|p| hash_file(p))
                .collect::<Result<_>>()?,
            duration_ms: self.started.elapsed().as_millis() as u64,
            created_at: timestamp(),
        };
        let json = serde_json::to_vec_pretty(&manifest)?;
        std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))
    }
}

/// `<file>.manifest.json` next to a single-file output.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}
