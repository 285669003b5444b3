use std::io::Write;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use cf_synth::pipeline::{Engine, EngineConfig};
use cf_synth::service::{router, AppState};

fn state() -> AppState {
    AppState::with_engine(Engine::default(), 1000, None)
}

async fn call(state: &AppState, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

fn numbers(values: &[f64], formats: &[u32]) -> Value {
    values
        .iter()
        .zip(formats)
        .map(|(v, f)| json!({"value": v, "type": "number", "format": f}))
        .collect()
}

fn suggest_body() -> String {
    json!({
        "column": numbers(&[1.0, 1.0, 1.0, 40.0, 40.0, 40.0], &[1, 0, 0, 1, 0, 0]),
        "observed": [0, 3],
        "anchor": "B2",
    })
    .to_string()
}

#[tokio::test]
async fn suggest_returns_rules_with_formulas() {
    let (status, body) = call(&state(), "POST", "/v1/suggest", Some(suggest_body())).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let suggestions = body["suggestions"].as_array().unwrap();
    assert!(!suggestions.is_empty());
    let top = &suggestions[0];
    assert!(top["rule_text"].as_str().unwrap().starts_with("IF "));
    let formula = top["excel_formula"][0]["formula"].as_str().unwrap();
    assert!(formula.contains("B2"), "{formula}");
    assert_eq!(top["per_cell_formats"].as_array().unwrap().len(), 6);
    assert!(body["diagnostics"]["n_cells"].as_u64() == Some(6));
}

#[tokio::test]
async fn top_k_and_config_overrides_apply() {
    let body = json!({
        "column": numbers(&[1.0, 2.0, 3.0, 40.0, 50.0, 60.0], &[0, 0, 0, 1, 1, 1]),
        "observed": [3, 4],
        "top_k": 1,
        "config": {"max_iter": 2},
    })
    .to_string();
    let (status, body) = call(&state(), "POST", "/v1/suggest", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["suggestions"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn request_errors_map_to_status_codes() {
    let s = state();
    let cases = [
        ("{not json", StatusCode::BAD_REQUEST),
        (r#"{"column": [], "observed": [], "extra": 1}"#, StatusCode::BAD_REQUEST),
        (
            &json!({"column": numbers(&[1.0, 2.0], &[0, 0]), "observed": []}).to_string(),
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            &json!({"column": numbers(&[1.0, 2.0], &[1, 0]), "observed": [7]}).to_string(),
            StatusCode::BAD_REQUEST,
        ),
        (
            &json!({"column": numbers(&[1.0, 2.0], &[1, 0]), "observed": [0], "config": {"bogus": 1}}).to_string(),
            StatusCode::BAD_REQUEST,
        ),
        (
            &json!({"column": numbers(&[1.0, 2.0], &[1, 0]), "observed": [0], "config": {"ranker_model": "/tmp/x"}})
                .to_string(),
            StatusCode::BAD_REQUEST,
        ),
    ];
    for (body, want) in cases {
        let (status, err) = call(&s, "POST", "/v1/suggest", Some(body.to_string())).await;
        assert_eq!(status, want, "{body}");
        assert!(err["error"].is_string(), "{body}");
    }
}

#[tokio::test]
async fn oversized_column_is_413() {
    let s = AppState::with_engine(Engine::default(), 4, None);
    let (status, _) = call(&s, "POST", "/v1/suggest", Some(suggest_body())).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn simplify_endpoint() {
    let body = json!({
        "column": numbers(&[1.0, 5.0, 9.0, 12.0], &[0, 0, 0, 0]),
        "rule_text": "IF greater(c, 4) AND greater(c, 2) THEN 1",
    })
    .to_string();
    let (status, body) = call(&state(), "POST", "/v1/simplify", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["changed"], json!(true));
    assert!(!body["rule_text"].as_str().unwrap().contains(" AND "));

    let bad = json!({"column": numbers(&[1.0], &[0]), "rule_text": "IF nope"}).to_string();
    let (status, _) = call(&state(), "POST", "/v1/simplify", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn health_reports_version_and_hash() {
    let s = state();
    let (status, body) = call(&s, "GET", "/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(body["config_hash"].as_str().unwrap(), s.config_hash());
}

#[tokio::test]
async fn reload_picks_up_config_changes() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(EngineConfig::default().to_toml().as_bytes()).unwrap();
    let path = file.path().to_path_buf();
    let engine = Engine::new(EngineConfig::load(&path).unwrap()).unwrap();
    let s = AppState::with_engine(engine, 1000, Some(path.clone()));
    let before = s.config_hash();

    let config = EngineConfig { top_k: 2, ..EngineConfig::default() };
    std::fs::write(&path, config.to_toml()).unwrap();
    let (status, _) = call(&s, "POST", "/v1/reload", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_ne!(s.config_hash(), before);
    assert_eq!(s.engine().config().top_k, 2);

    std::fs::write(&path, "top_k = 0").unwrap();
    let (status, _) = call(&s, "POST", "/v1/reload", None).await;
    assert!(status.is_client_error() || status.is_server_error());
    assert_eq!(s.engine().config().top_k, 2);
}

#[tokio::test]
async fn reload_without_config_file_fails() {
    let (status, body) = call(&state(), "POST", "/v1/reload", None).await;
    assert!(!status.is_success());
    assert!(body["error"].is_string());
}

#[tokio::test]
async fn cors_allows_browser_callers() {
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/v1/suggest")
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .header("access-control-request-headers", "content-type")
        .body(Body::empty())
        .unwrap();
    let resp = router(state()).oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_agree() {
    let s = state();
    let (_, expected) = call(&s, "POST", "/v1/suggest", Some(suggest_body())).await;
    let handles: Vec<_> = (0..64)
        .map(|_| {
            let s = s.clone();
            tokio::spawn(async move { call(&s, "POST", "/v1/suggest", Some(suggest_body())).await })
        })
        .collect();
    for h in handles {
        let (status, body) = h.await.unwrap();
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["suggestions"], expected["suggestions"]);
    }
}

#[test]
fn openapi_documents_every_route() {
    let doc = include_str!("../openapi.yaml");
    for path in ["/v1/suggest:", "/v1/simplify:", "/v1/health:", "/v1/reload:"] {
        assert!(doc.contains(path), "{path}");
    }
}
