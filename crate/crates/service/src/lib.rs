//! HTTP/JSON facade over classification, the novelty queue, labeling and
//! incremental updates.
//!
//! Readers (classify, queue, model, history) work against an immutable
//! checkpoint snapshot. Every mutation goes through one writer lock, and at
//! most one increment runs at a time; its result replaces the snapshot
//! atomically once it has been persisted.

mod api;
pub mod store;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use axum::Router;
use contfood_core::continual::{IncrementConfig, DEFAULT_TAU};
use contfood_core::nnet::Checkpoint;
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

use store::{Store, BUFFER_FILE, CHECKPOINT_FILE, HISTORY_FILE};

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_INCREMENT_TIMEOUT: Duration = Duration::from_secs(300);

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    /// Initial checkpoint, copied into the data directory on first start.
    pub checkpoint: Option<PathBuf>,
    pub tau: f64,
    pub increment: IncrementConfig,
    pub increment_timeout: Duration,
    /// Directory of static assets (the labeling console) served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            addr: DEFAULT_ADDR.parse().expect("valid default address"),
            data_dir: data_dir.into(),
            checkpoint: None,
            tau: DEFAULT_TAU,
            increment: IncrementConfig::default(),
            increment_timeout: DEFAULT_INCREMENT_TIMEOUT,
            static_dir: None,
        }
    }
}

pub(crate) struct Inner {
    pub config: ServiceConfig,
    snapshot: RwLock<Option<Arc<Checkpoint>>>,
    pub store: Mutex<Store>,
    incrementing: AtomicBool,
}

/// Shared server state; cheap to clone.
#[derive(Clone)]
pub struct AppState(pub(crate) Arc<Inner>);

/// Held while an increment runs; releases the single-writer slot on drop.
pub struct IncrementGuard {
    state: AppState,
}

impl Drop for IncrementGuard {
    fn drop(&mut self) {
        self.state.0.incrementing.store(false, Ordering::Release);
    }
}

impl AppState {
    /// Opens the data directory, seeding it from `config.checkpoint` (and the
    /// `history.json` / `buffer.json` next to it) when it has no model yet.
    pub fn open(config: ServiceConfig) -> std::io::Result<Self> {
        std::fs::create_dir_all(&config.data_dir)?;
        if let Some(src) = &config.checkpoint {
            seed_data_dir(src, &config.data_dir)?;
        }
        let store = Store::open(&config.data_dir)?;
        let snapshot = store.load_checkpoint().transpose()?.map(Arc::new);
        Ok(Self(Arc::new(Inner {
            config,
            snapshot: RwLock::new(snapshot),
            store: Mutex::new(store),
            incrementing: AtomicBool::new(false),
        })))
    }

    pub fn snapshot(&self) -> Option<Arc<Checkpoint>> {
        self.0
            .snapshot
            .read()
            .expect("snapshot lock poisoned")
            .clone()
    }

    pub(crate) fn swap_snapshot(&self, checkpoint: Checkpoint) {
        *self.0.snapshot.write().expect("snapshot lock poisoned") = Some(Arc::new(checkpoint));
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.0.config
    }

    /// Claims the increment slot, or `None` when an increment is running.
    pub fn try_acquire_increment(&self) -> Option<IncrementGuard> {
        self.0
            .incrementing
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| IncrementGuard {
                state: self.clone(),
            })
    }
}

fn seed_data_dir(checkpoint: &Path, data_dir: &Path) -> std::io::Result<()> {
    let target = data_dir.join(CHECKPOINT_FILE);
    if target.exists() {
        return Ok(());
    }
    std::fs::copy(checkpoint, &target)?;
    if let Some(parent) = checkpoint.parent() {
        for name in [HISTORY_FILE, BUFFER_FILE] {
            let src = parent.join(name);
            let dst = data_dir.join(name);
            if src.exists() && !dst.exists() {
                std::fs::copy(src, dst)?;
            }
        }
    }
    Ok(())
}

pub fn router(state: AppState) -> Router {
    let static_dir = state.config().static_dir.clone();
    let app = api::routes().with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Binds `config.addr` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let addr = config.addr;
    let state = AppState::open(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
