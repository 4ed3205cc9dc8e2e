//! `/v1` endpoints.

use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use contfood_core::continual::{
    detect_novel, forgetting_report, increment, ForgettingReport, IncrementConfig, ReplayBuffer,
    Strategy,
};
use contfood_core::corpus::{normalize_name, DishRecord, Label};
use contfood_core::nnet::{Checkpoint, EpochRecord, FORMAT_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::{now, LabelEvent, LabelSource, QueueEntry, QueueStatus};
use crate::AppState;

pub(crate) fn routes() -> Router<AppState> {
    Router::new()
        .route("/v1/classify", post(classify))
        .route("/v1/queue", get(queue))
        .route("/v1/labels", post(labels))
        .route("/v1/increment", post(run_increment))
        .route("/v1/model", get(model))
        .route("/v1/metrics/history", get(history))
}

#[derive(Debug)]
pub(crate) struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn no_model() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "no_model",
            "no checkpoint loaded",
        )
    }

    fn internal(message: impl std::fmt::Display) -> Self {
        Self::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "internal",
            message.to_string(),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code, "message": self.message });
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<std::io::Error> for ApiError {
    fn from(e: std::io::Error) -> Self {
        ApiError::internal(e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn current_model(state: &AppState) -> ApiResult<std::sync::Arc<Checkpoint>> {
    state.snapshot().ok_or_else(ApiError::no_model)
}

#[derive(Deserialize)]
struct ClassifyRequest {
    item_name: String,
}

#[derive(Serialize)]
struct ClassifyResponse {
    label: Label,
    probability: f64,
    novel: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    queue_id: Option<u64>,
}

async fn classify(
    State(state): State<AppState>,
    body: Result<Json<ClassifyRequest>, JsonRejection>,
) -> ApiResult<Json<ClassifyResponse>> {
    let Json(req) = body?;
    let name = req.item_name.trim();
    if name.is_empty() {
        return Err(ApiError::bad_request("item_name must not be empty"));
    }
    let model = current_model(&state)?;
    let verdict = detect_novel(&model, name, state.config().tau).map_err(ApiError::internal)?;
    let reason = verdict.reason.map(|r| r.as_str());

    let mut queue_id = None;
    if let Some(reason) = reason {
        let key = normalize_name(name);
        let mut store = state.0.store.lock().await;
        let existing = store
            .queue
            .iter()
            .find(|e| e.status == QueueStatus::Pending && normalize_name(&e.item_name) == key)
            .map(|e| e.id);
        let id = match existing {
            Some(id) => id,
            None => {
                let id = store.next_id();
                store.queue.push(QueueEntry {
                    id,
                    item_name: name.to_string(),
                    probability: verdict.probability,
                    flagged_reason: reason.to_string(),
                    enqueued_at: now(),
                    status: QueueStatus::Pending,
                });
                store.save_queue()?;
                id
            }
        };
        queue_id = Some(id);
    }

    Ok(Json(ClassifyResponse {
        label: Label::from_u8(verdict.label).expect("binary label"),
        probability: verdict.probability,
        novel: verdict.flagged,
        reason,
        queue_id,
    }))
}

async fn queue(State(state): State<AppState>) -> Json<Vec<QueueEntry>> {
    Json(state.0.store.lock().await.pending())
}

#[derive(Deserialize)]
struct LabelRequest {
    id: Option<u64>,
    item_name: Option<String>,
    label: String,
    source: Option<LabelSource>,
}

fn parse_label(raw: &str) -> ApiResult<Label> {
    match Label::parse_token(raw) {
        Ok(Some(label)) => Ok(label),
        _ => Err(ApiError::bad_request(format!(
            "invalid label {raw:?}; allowed values: veg, nonveg"
        ))),
    }
}

/// Labels a queue entry by id, or by name. A name with no pending entry is
/// labeled directly and still joins the staging set.
async fn labels(
    State(state): State<AppState>,
    body: Result<Json<LabelRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<LabelEvent>)> {
    let Json(req) = body?;
    let label = parse_label(&req.label)?;
    let mut store = state.0.store.lock().await;

    let index = match (req.id, req.item_name.as_deref()) {
        (Some(id), _) => {
            let i = store.queue.iter().position(|e| e.id == id).ok_or_else(|| {
                ApiError::new(
                    StatusCode::NOT_FOUND,
                    "not_found",
                    format!("no queue entry {id}"),
                )
            })?;
            Some(i)
        }
        (None, Some(name)) if !name.trim().is_empty() => {
            let key = normalize_name(name);
            store.queue.iter().position(|e| {
                e.status == QueueStatus::Pending && normalize_name(&e.item_name) == key
            })
        }
        _ => {
            return Err(ApiError::bad_request(
                "either id or a non-empty item_name is required",
            ))
        }
    };

    let (id, item_name) = match index {
        Some(i) => {
            let entry = &store.queue[i];
            if entry.status == QueueStatus::Labeled {
                return Err(ApiError::new(
                    StatusCode::CONFLICT,
                    "already_labeled",
                    format!("queue entry {} is already labeled", entry.id),
                ));
            }
            (Some(entry.id), entry.item_name.clone())
        }
        None => (
            None,
            req.item_name.clone().unwrap_or_default().trim().to_string(),
        ),
    };

    let event = LabelEvent {
        id,
        item_name: item_name.clone(),
        label,
        source: req.source.unwrap_or(LabelSource::Human),
        timestamp: now(),
    };
    store.append_label(&event)?;
    if let Some(i) = index {
        store.queue[i].status = QueueStatus::Labeled;
        store.save_queue()?;
    }
    let record =
        DishRecord::labeled(item_name, label).map_err(|e| ApiError::bad_request(e.to_string()))?;
    store.staging.push(record);
    store.save_staging()?;
    Ok((StatusCode::CREATED, Json(event)))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct IncrementRequest {
    strategy: Option<String>,
    epochs: Option<usize>,
    seed: Option<u64>,
}

/// Held-out records for the before/after comparison: the configured old
/// test set, else the replay buffer's items, else the staged items.
fn old_test_set(
    old_test: &[DishRecord],
    buffer: &ReplayBuffer,
    staging: &[DishRecord],
) -> Vec<DishRecord> {
    if !old_test.is_empty() {
        return old_test.to_vec();
    }
    let from_buffer: Vec<DishRecord> = buffer
        .items()
        .iter()
        .filter_map(|item| {
            DishRecord::labeled(item.item_name.clone(), Label::from_u8(item.label)?).ok()
        })
        .collect();
    if !from_buffer.is_empty() {
        from_buffer
    } else {
        staging.to_vec()
    }
}

struct Computed {
    checkpoint: Checkpoint,
    buffer: ReplayBuffer,
    report: ForgettingReport,
}

fn compute_increment(
    before: &Checkpoint,
    mut buffer: ReplayBuffer,
    staged: &[DishRecord],
    old_test: &[DishRecord],
    strategy: Strategy,
    config: &IncrementConfig,
) -> contfood_core::Result<Computed> {
    let started = Instant::now();
    let out = increment(before, &mut buffer, staged, strategy, config)?;
    let runtime_ms = started.elapsed().as_millis() as u64;
    let mut after = out.checkpoint;
    after.meta.created_at = now();
    let mut report = forgetting_report(before, &after, old_test, strategy, out.new_count)?
        .with_new_items(before, &after, staged)?;
    report.seed = config.seed;
    report.replayed_count = out.replayed_count;
    report.runtime_ms = runtime_ms;
    Ok(Computed {
        checkpoint: after,
        buffer,
        report,
    })
}

async fn run_increment(
    State(state): State<AppState>,
    body: Result<Json<IncrementRequest>, JsonRejection>,
) -> ApiResult<Json<ForgettingReport>> {
    let Json(req) = body?;
    let strategy: Strategy = req
        .strategy
        .as_deref()
        .unwrap_or("replay")
        .parse()
        .map_err(|e: contfood_core::Error| ApiError::bad_request(e.to_string()))?;
    if strategy == Strategy::FullRetrain {
        return Err(ApiError::bad_request("strategy must be replay or naive"));
    }
    let guard = state.try_acquire_increment().ok_or_else(|| {
        ApiError::new(
            StatusCode::CONFLICT,
            "increment_in_progress",
            "another increment is running",
        )
    })?;
    let before = current_model(&state)?;

    let mut config = state.config().increment.clone();
    config.seed = req.seed.unwrap_or(before.meta.increments_applied);
    if let Some(epochs) = req.epochs {
        config.epochs = epochs;
    }
    config
        .validate()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;

    let (staged, buffer, old_test) = {
        let store = state.0.store.lock().await;
        if store.staging.is_empty() {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "empty_staging",
                "no labeled items are staged for an increment",
            ));
        }
        let old_test = old_test_set(&store.old_test, &store.buffer, &store.staging);
        (store.staging.clone(), store.buffer.clone(), old_test)
    };

    // The work runs detached so a dropped connection cannot interrupt the
    // commit half-way; the guard lives until both halves are done.
    let guard = std::sync::Arc::new(guard);
    let timeout = state.config().increment_timeout;
    let task_state = state.clone();
    let task = tokio::spawn(async move {
        let compute_guard = guard.clone();
        let model = before.clone();
        let staged_for_compute = staged.clone();
        let compute = tokio::task::spawn_blocking(move || {
            let _guard = compute_guard;
            compute_increment(
                &model,
                buffer,
                &staged_for_compute,
                &old_test,
                strategy,
                &config,
            )
        });
        let computed = match tokio::time::timeout(timeout, compute).await {
            Err(_) => {
                return Err(ApiError::new(
                    StatusCode::GATEWAY_TIMEOUT,
                    "timeout",
                    format!(
                        "increment exceeded {} s; nothing was applied",
                        timeout.as_secs_f64()
                    ),
                ))
            }
            Ok(Err(join)) => return Err(ApiError::internal(join)),
            Ok(Ok(Err(e))) if e.is_numeric() => {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "numeric_failure",
                    e.to_string(),
                ))
            }
            Ok(Ok(Err(e))) => return Err(ApiError::bad_request(e.to_string())),
            Ok(Ok(Ok(c))) => c,
        };

        let mut store = task_state.0.store.lock().await;
        store.save_checkpoint(&computed.checkpoint)?;
        store.buffer = computed.buffer;
        store.save_buffer()?;
        // Labels that arrived while the increment ran stay staged.
        store.staging.drain(..staged.len());
        store.save_staging()?;
        store.append_report(&computed.report)?;
        store.reports.push(computed.report.clone());
        task_state.swap_snapshot(computed.checkpoint);
        drop(guard);
        Ok(computed.report)
    });
    let report = task.await.map_err(ApiError::internal)??;
    Ok(Json(report))
}

#[derive(Serialize)]
struct ModelInfo {
    format_version: u64,
    vocab_size: usize,
    input_dim: usize,
    layers: Vec<[usize; 2]>,
    increments_applied: u64,
    vocabulary_hash: String,
    created_at: String,
}

async fn model(State(state): State<AppState>) -> ApiResult<Json<ModelInfo>> {
    let m = current_model(&state)?;
    Ok(Json(ModelInfo {
        format_version: FORMAT_VERSION,
        vocab_size: m.vectorizer.vocab_size(),
        input_dim: m.params.input_dim(),
        layers: m.params.dims().iter().map(|&(r, c)| [r, c]).collect(),
        increments_applied: m.meta.increments_applied,
        vocabulary_hash: m.vocabulary_hash(),
        created_at: m.meta.created_at.clone(),
    }))
}

#[derive(Serialize)]
struct History {
    training: Vec<EpochRecord>,
    increments: Vec<ForgettingReport>,
}

async fn history(State(state): State<AppState>) -> ApiResult<Json<History>> {
    current_model(&state)?;
    let store = state.0.store.lock().await;
    Ok(Json(History {
        training: store.training_history.clone(),
        increments: store.reports.clone(),
    }))
}
