//! Endpoint behavior through the router, without a socket.

use std::path::Path;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use contfood_core::corpus::{Corpus, DishRecord, Label};
use contfood_core::nnet::{Checkpoint, TrainConfig};
use contfood_core::pipeline::{train_pipeline, PipelineOptions};
use contfood_service::store::{CHECKPOINT_FILE, HISTORY_FILE, LABELS_FILE};
use contfood_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const OOV: &str = "zzyzx quux";

fn toy_model() -> (Checkpoint, Vec<contfood_core::nnet::EpochRecord>) {
    let records = (0..80)
        .map(|i| {
            let (name, label) = if i % 2 == 0 {
                (format!("paneer masala{}", i % 4), Label::Veg)
            } else {
                (format!("chicken masala{}", i % 4), Label::NonVeg)
            };
            DishRecord::labeled(name, label).unwrap()
        })
        .collect();
    let opts = PipelineOptions {
        train: TrainConfig {
            max_epochs: 40,
            ..Default::default()
        },
        ..Default::default()
    };
    let trained = train_pipeline(&Corpus::new(records, "toy"), &opts).unwrap();
    (trained.checkpoint, trained.outcome.history)
}

fn write_model(dir: &Path) -> usize {
    let (ckpt, history) = toy_model();
    ckpt.write(&dir.join(CHECKPOINT_FILE)).unwrap();
    std::fs::write(
        dir.join(HISTORY_FILE),
        serde_json::to_vec(&history).unwrap(),
    )
    .unwrap();
    history.len()
}

fn open(dir: &Path) -> AppState {
    AppState::open(ServiceConfig::new(dir)).unwrap()
}

async fn call(
    state: &AppState,
    method: &str,
    uri: &str,
    body: Option<Value>,
) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => builder
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn classify(state: &AppState, name: &str) -> (StatusCode, Value) {
    call(
        state,
        "POST",
        "/v1/classify",
        Some(json!({ "item_name": name })),
    )
    .await
}

#[tokio::test]
async fn confident_name_is_not_novel() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let state = open(dir.path());
    let (status, body) = classify(&state, "paneer masala0").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["label"], "veg");
    assert_eq!(body["novel"], false);
    assert!(body.get("reason").is_none());
    let (_, body) = classify(&state, "chicken masala1").await;
    assert_eq!(body["label"], "nonveg");
    let (_, queue) = call(&state, "GET", "/v1/queue", None).await;
    assert_eq!(queue, json!([]));
}

#[tokio::test]
async fn all_oov_name_is_enqueued_once() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let state = open(dir.path());
    let (status, first) = classify(&state, OOV).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(first["novel"], true);
    assert_eq!(first["reason"], "all_oov");
    let (_, second) = classify(&state, "  ZZYZX   Quux ").await;
    assert_eq!(second["queue_id"], first["queue_id"]);
    let (_, queue) = call(&state, "GET", "/v1/queue", None).await;
    let queue = queue.as_array().unwrap();
    assert_eq!(queue.len(), 1);
    assert_eq!(queue[0]["item_name"], OOV);
    assert_eq!(queue[0]["flagged_reason"], "all_oov");
    assert_eq!(queue[0]["status"], "pending");
}

#[tokio::test]
async fn classify_validation_and_missing_model() {
    let dir = tempfile::tempdir().unwrap();
    let state = open(dir.path());
    let (status, body) = classify(&state, "paneer").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(body["error"], "no_model");
    assert!(body["message"].is_string());
    assert_eq!(
        call(&state, "GET", "/v1/model", None).await.0,
        StatusCode::SERVICE_UNAVAILABLE
    );
    assert_eq!(
        call(&state, "GET", "/v1/metrics/history", None).await.0,
        StatusCode::SERVICE_UNAVAILABLE
    );
    assert_eq!(
        call(&state, "GET", "/v1/queue", None).await,
        (StatusCode::OK, json!([]))
    );

    write_model(dir.path());
    let state = open(dir.path());
    let (status, body) = classify(&state, "   ").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "bad_request");
    let (status, _) = call(&state, "POST", "/v1/classify", Some(json!({ "name": "x" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn queue_lists_pending_in_id_order() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let state = open(dir.path());
    for name in ["aaa bbb", "ccc ddd", "eee fff", "ggg hhh"] {
        classify(&state, name).await;
    }
    let (status, _) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "id": 2, "label": "veg" })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let (_, queue) = call(&state, "GET", "/v1/queue", None).await;
    let ids: Vec<u64> = queue
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, vec![1, 3, 4]);
    let (_, again) = call(&state, "GET", "/v1/queue", None).await;
    assert_eq!(queue, again);
}

#[tokio::test]
async fn labeling_rules() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let state = open(dir.path());
    let (_, c) = classify(&state, OOV).await;
    let id = c["queue_id"].as_u64().unwrap();

    let (status, body) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "id": id, "label": "vegan" })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["message"].as_str().unwrap().contains("veg, nonveg"));

    let (status, body) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "id": 99, "label": "veg" })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "not_found");

    let (status, event) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "id": id, "label": "nonveg" })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(event["id"], id);
    assert_eq!(event["item_name"], OOV);
    assert_eq!(event["label"], "nonveg");
    assert_eq!(event["source"], "human");
    assert_eq!(call(&state, "GET", "/v1/queue", None).await.1, json!([]));

    let (status, body) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "id": id, "label": "nonveg" })),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "already_labeled");

    // A relabeled name may be queued again.
    let (_, c2) = classify(&state, OOV).await;
    assert!(c2["queue_id"].as_u64().unwrap() > id);
}

#[tokio::test]
async fn label_log_replays_to_staging_set() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let state = open(dir.path());
    classify(&state, "aaa bbb").await;
    classify(&state, "ccc ddd").await;
    call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "id": 2, "label": "veg" })),
    )
    .await;
    let (status, event) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "item_name": "aaa bbb", "label": "nonveg", "source": "heuristic" })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(event["id"], 1);
    assert_eq!(event["source"], "heuristic");
    let (status, event) = call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "item_name": "tofu bowl", "label": "veg" })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert!(event["id"].is_null());

    let log = std::fs::read_to_string(dir.path().join(LABELS_FILE)).unwrap();
    let replayed: Vec<(String, String)> = log
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            (
                v["item_name"].as_str().unwrap().to_string(),
                v["label"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let staging = std::fs::read_to_string(dir.path().join("staging.jsonl")).unwrap();
    let staged: Vec<(String, String)> = staging
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            (
                v["item_name"].as_str().unwrap().to_string(),
                v["type"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    assert_eq!(replayed, staged);
    assert_eq!(
        replayed,
        vec![
            ("ccc ddd".to_string(), "veg".to_string()),
            ("aaa bbb".to_string(), "nonveg".to_string()),
            ("tofu bowl".to_string(), "veg".to_string()),
        ]
    );
}

#[tokio::test]
async fn increment_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let epochs = write_model(dir.path());
    let state = open(dir.path());

    let (status, model) = call(&state, "GET", "/v1/model", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(model["increments_applied"], 0);
    assert_eq!(model["format_version"], 1);
    assert!(model["vocab_size"].as_u64().unwrap() <= 5000);
    assert_eq!(model["layers"], json!([[5000, 64], [64, 32], [32, 1]]));
    let vocab_hash = model["vocabulary_hash"].clone();

    let (status, body) = call(
        &state,
        "POST",
        "/v1/increment",
        Some(json!({ "strategy": "replay" })),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "empty_staging");

    classify(&state, OOV).await;
    call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "item_name": OOV, "label": "nonveg" })),
    )
    .await;
    call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "item_name": "paneer masala1", "label": "veg" })),
    )
    .await;

    {
        let _held = state.try_acquire_increment().unwrap();
        let (status, body) = call(&state, "POST", "/v1/increment", Some(json!({}))).await;
        assert_eq!(status, StatusCode::CONFLICT);
        assert_eq!(body["error"], "increment_in_progress");
        // Reads keep working while the slot is held.
        assert_eq!(classify(&state, "paneer masala0").await.0, StatusCode::OK);
    }

    let (status, body) = call(
        &state,
        "POST",
        "/v1/increment",
        Some(json!({ "strategy": "bogus" })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["message"].as_str().unwrap().contains("replay"));

    let (status, report) = call(
        &state,
        "POST",
        "/v1/increment",
        Some(json!({ "strategy": "naive", "epochs": 3, "seed": 5 })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["strategy"], "naive");
    assert_eq!(report["new_items_count"], 2);
    assert_eq!(report["seed"], 5);
    assert_eq!(report["increments_applied"], 1);
    let before = report["old_test_accuracy_before"].as_f64().unwrap();
    let after = report["old_test_accuracy_after"].as_f64().unwrap();
    assert_eq!(report["accuracy_drop"].as_f64().unwrap(), before - after);

    let (_, model) = call(&state, "GET", "/v1/model", None).await;
    assert_eq!(model["increments_applied"], 1);
    assert_eq!(model["vocabulary_hash"], vocab_hash);

    let (_, history) = call(&state, "GET", "/v1/metrics/history", None).await;
    assert_eq!(history["training"].as_array().unwrap().len(), epochs);
    assert_eq!(history["increments"].as_array().unwrap().len(), 1);

    // Staging was consumed.
    let (status, _) = call(&state, "POST", "/v1/increment", Some(json!({}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    // Everything survives a restart, and queue ids continue.
    drop(state);
    let state = open(dir.path());
    let (_, model) = call(&state, "GET", "/v1/model", None).await;
    assert_eq!(model["increments_applied"], 1);
    let (_, history) = call(&state, "GET", "/v1/metrics/history", None).await;
    assert_eq!(history["increments"].as_array().unwrap().len(), 1);
    let (_, c) = classify(&state, "qqq www").await;
    assert_eq!(c["queue_id"], 2);
}

#[tokio::test]
async fn seeded_from_external_checkpoint() {
    let src = tempfile::tempdir().unwrap();
    let epochs = write_model(src.path());
    let data = tempfile::tempdir().unwrap();
    let mut config = ServiceConfig::new(data.path().join("state"));
    config.checkpoint = Some(src.path().join(CHECKPOINT_FILE));
    let state = AppState::open(config).unwrap();
    let (status, history) = call(&state, "GET", "/v1/metrics/history", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(history["training"].as_array().unwrap().len(), epochs);
    assert!(data.path().join("state").join(CHECKPOINT_FILE).exists());
}

#[tokio::test]
async fn static_assets_are_served() {
    let dir = tempfile::tempdir().unwrap();
    let assets = tempfile::tempdir().unwrap();
    std::fs::write(assets.path().join("index.html"), "<h1>console</h1>").unwrap();
    let mut config = ServiceConfig::new(dir.path());
    config.static_dir = Some(assets.path().to_path_buf());
    let state = AppState::open(config).unwrap();
    let req = Request::builder()
        .uri("/index.html")
        .body(Body::empty())
        .unwrap();
    let resp = router(state).oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    assert_eq!(&bytes[..], b"<h1>console</h1>");
}

#[tokio::test]
async fn old_test_file_is_scored_before_and_after() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path());
    let old = "{\"item_name\":\"paneer masala0\",\"type\":\"veg\"}\n{\"item_name\":\"chicken masala1\",\"type\":\"nonveg\"}\n";
    std::fs::write(dir.path().join("old_test.jsonl"), old).unwrap();
    let state = open(dir.path());
    call(
        &state,
        "POST",
        "/v1/labels",
        Some(json!({ "item_name": "tofu bowl", "label": "veg" })),
    )
    .await;
    let staged = std::fs::read_to_string(dir.path().join("staging.jsonl")).unwrap();
    assert_eq!(
        staged,
        "{\"item_name\":\"tofu bowl\",\"type\":\"veg\",\"ingredients\":[]}\n"
    );
    let (status, report) = call(
        &state,
        "POST",
        "/v1/increment",
        Some(json!({ "epochs": 1 })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{report}");
    assert_eq!(report["strategy"], "replay");
    assert_eq!(report["old_test_accuracy_before"], 1.0);
}
