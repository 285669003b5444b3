//! Stateless HTTP suggestion service.
//!
//! Endpoints: `POST /v1/suggest`, `POST /v1/simplify`, `GET /v1/health` and
//! `POST /v1/reload`. Every request carries the whole column; the only server
//! state is the engine, which is swapped atomically on reload.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tower_http::cors::{Any, CorsLayer};

use crate::column::{CellRecord, Column, FormatId, TaskRecord};
use crate::error::Error;
use crate::pipeline::{Diagnostics, Engine, EngineConfig, LearnOutcome};
use crate::ranking::RuleFeatures;
use crate::rule::{to_excel_formula, Rule};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_MAX_CELLS: usize = 100_000;
const BYTES_PER_CELL: usize = 256;

/// Settings read from `CF_PORT`, `CF_CONFIG` and `CF_MAX_CELLS`.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub port: u16,
    pub config_path: Option<PathBuf>,
    pub max_cells: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            port: DEFAULT_PORT,
            config_path: None,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl Settings {
    pub fn from_env() -> crate::Result<Self> {
        let parse = |name: &str| -> crate::Result<Option<usize>> {
            match std::env::var(name) {
                Ok(v) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("{name}: `{v}` is not a non-negative integer"))),
                Err(_) => Ok(None),
            }
        };
        let port = match parse("CF_PORT")? {
            Some(p) => u16::try_from(p).map_err(|_| Error::Config(format!("CF_PORT: {p} out of range")))?,
            None => DEFAULT_PORT,
        };
        Ok(Settings {
            port,
            config_path: std::env::var_os("CF_CONFIG").map(PathBuf::from),
            max_cells: parse("CF_MAX_CELLS")?.unwrap_or(DEFAULT_MAX_CELLS),
        })
    }
}

struct Loaded {
    engine: Engine,
    config_hash: String,
}

/// Shared handler state.
#[derive(Clone)]
pub struct AppState {
    loaded: Arc<RwLock<Arc<Loaded>>>,
    config_path: Option<PathBuf>,
    max_cells: usize,
}

/// Hex SHA-256 of the engine configuration and its ranker weights.
pub fn config_hash(engine: &Engine) -> String {
    let mut h = Sha256::new();
    h.update(engine.config().to_toml().as_bytes());
    if let Some(path) = &engine.config().ranker_model {
        if let Ok(bytes) = std::fs::read(path) {
            h.update(&bytes);
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn load_engine(path: Option<&PathBuf>) -> crate::Result<Engine> {
    let config = match path {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    };
    Engine::new(config)
}

impl AppState {
    /// Loads the engine from `settings.config_path`, or the defaults.
    pub fn from_settings(settings: &Settings) -> crate::Result<Self> {
        let engine = load_engine(settings.config_path.as_ref())?;
        Ok(Self::with_engine(engine, settings.max_cells, settings.config_path.clone()))
    }

    pub fn with_engine(engine: Engine, max_cells: usize, config_path: Option<PathBuf>) -> Self {
        let config_hash = config_hash(&engine);
        AppState {
            loaded: Arc::new(RwLock::new(Arc::new(Loaded { engine, config_hash }))),
            config_path,
            max_cells,
        }
    }

    fn current(&self) -> Arc<Loaded> {
        self.loaded.read().expect("state lock").clone()
    }

    pub fn engine(&self) -> Engine {
        self.current().engine.clone()
    }

    pub fn config_hash(&self) -> String {
        self.current().config_hash.clone()
    }

    /// Replaces the engine; in-flight requests finish on the old one.
    pub fn replace_engine(&self, engine: Engine) {
        let config_hash = config_hash(&engine);
        *self.loaded.write().expect("state lock") = Arc::new(Loaded { engine, config_hash });
    }

    /// Re-reads the configuration file.
    pub fn reload(&self) -> crate::Result<()> {
        let path = self
            .config_path
            .as_ref()
            .ok_or_else(|| Error::Config("no configuration file is set (CF_CONFIG)".into()))?;
        self.replace_engine(load_engine(Some(path))?);
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestRequest {
    pub column: Vec<CellRecord>,
    #[serde(default)]
    pub observed: Vec<usize>,
    /// Engine settings overriding the server's, except `ranker_model`.
    #[serde(default)]
    pub config: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default)]
    pub top_k: Option<usize>,
    /// Cell reference substituted into Excel formulas.
    #[serde(default)]
    pub anchor: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchFormula {
    pub format: FormatId,
    pub formula: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuggestionBody {
    pub rule_text: String,
    /// One formula per format, in branch order.
    pub excel_formula: Vec<BranchFormula>,
    pub score: f64,
    pub per_cell_formats: Vec<FormatId>,
    pub features: Vec<RuleFeatures>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuggestResponse {
    pub suggestions: Vec<SuggestionBody>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplifyRequest {
    pub column: Vec<CellRecord>,
    pub rule_text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplifyResponse {
    pub rule_text: String,
    pub changed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub version: String,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

/// An error status with a JSON `{error}` body.
#[derive(Debug)]
pub struct ApiError(pub StatusCode, pub String);

impl ApiError {
    fn bad_request(msg: impl ToString) -> Self {
        ApiError(StatusCode::BAD_REQUEST, msg.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorBody { error: self.1 })).into_response()
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn check_size(n: usize, max: usize) -> Result<(), ApiError> {
    if n > max {
        return Err(ApiError(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!("column has {n} cells; the limit is {max}"),
        ));
    }
    Ok(())
}

fn engine_for(base: &Engine, req: &SuggestRequest) -> Result<Engine, ApiError> {
    let mut config = base.config().clone();
    if let Some(overrides) = &req.config {
        if overrides.contains_key("ranker_model") {
            return Err(ApiError::bad_request("`ranker_model` cannot be overridden per request"));
        }
        let mut merged = serde_json::to_value(&config).expect("config serializes");
        let obj = merged.as_object_mut().expect("config is an object");
        for (k, v) in overrides {
            obj.insert(k.clone(), v.clone());
        }
        config = serde_json::from_value(merged).map_err(|e| ApiError::bad_request(format!("config: {e}")))?;
    }
    if let Some(k) = req.top_k {
        config.top_k = k;
    }
    if config == *base.config() {
        return Ok(base.clone());
    }
    base.with_config(config).map_err(ApiError::bad_request)
}

/// Runs one suggestion request against `engine`.
pub fn suggest(engine: &Engine, req: &SuggestRequest, max_cells: usize) -> Result<SuggestResponse, ApiError> {
    check_size(req.column.len(), max_cells)?;
    if req.observed.is_empty() {
        return Err(ApiError(
            StatusCode::UNPROCESSABLE_ENTITY,
            "at least one observed formatted example is required".into(),
        ));
    }
    let engine = engine_for(engine, req)?;
    let record = TaskRecord {
        column: req.column.clone(),
        observed: req.observed.clone(),
        gold_rule: None,
        gold_formats: None,
    };
    let task = crate::column::Task::from_record(record).map_err(ApiError::bad_request)?;
    let outcome = engine.learn(&task).map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    Ok(response_from_outcome(outcome, req.anchor.as_deref().unwrap_or("A1")))
}

/// Wire form of a learn outcome, with Excel formulas anchored at `anchor`.
pub fn response_from_outcome(outcome: LearnOutcome, anchor: &str) -> SuggestResponse {
    let suggestions = outcome
        .suggestions
        .into_iter()
        .map(|s| SuggestionBody {
            rule_text: s.rule.to_string(),
            excel_formula: s
                .rule
                .branches()
                .iter()
                .map(|b| BranchFormula {
                    format: b.format,
                    formula: to_excel_formula(&b.dnf, anchor),
                })
                .collect(),
            score: s.score,
            per_cell_formats: s.per_cell_formats,
            features: s.features,
        })
        .collect();
    SuggestResponse {
        suggestions,
        diagnostics: outcome.diagnostics,
    }
}

/// Runs one simplification request against `engine`.
pub fn simplify(engine: &Engine, req: &SimplifyRequest, max_cells: usize) -> Result<SimplifyResponse, ApiError> {
    check_size(req.column.len(), max_cells)?;
    let column = Column::from_cell_records(&req.column).map_err(ApiError::bad_request)?;
    let rule = Rule::parse(&req.rule_text).map_err(ApiError::bad_request)?;
    let simplified = engine.simplify(&rule, &column);
    let changed = simplified != rule;
    Ok(SimplifyResponse {
        rule_text: simplified.to_string(),
        changed,
    })
}

async fn suggest_handler(State(state): State<AppState>, body: Bytes) -> Result<Json<SuggestResponse>, ApiError> {
    let req: SuggestRequest = parse_body(&body)?;
    let engine = state.engine();
    let max = state.max_cells;
    tokio::task::spawn_blocking(move || suggest(&engine, &req, max))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map(Json)
}

async fn simplify_handler(State(state): State<AppState>, body: Bytes) -> Result<Json<SimplifyResponse>, ApiError> {
    let req: SimplifyRequest = parse_body(&body)?;
    let engine = state.engine();
    let max = state.max_cells;
    tokio::task::spawn_blocking(move || simplify(&engine, &req, max))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map(Json)
}

fn health_body(state: &AppState) -> HealthResponse {
    HealthResponse {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: state.config_hash(),
    }
}

async fn health_handler(State(state): State<AppState>) -> Json<HealthResponse> {
    Json(health_body(&state))
}

async fn reload_handler(State(state): State<AppState>) -> Result<Json<HealthResponse>, ApiError> {
    state.reload().map_err(ApiError::bad_request)?;
    Ok(Json(health_body(&state)))
}

/// The service routes with CORS open to any origin.
pub fn router(state: AppState) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let body_limit = state.max_cells.saturating_mul(BYTES_PER_CELL).max(1 << 20);
    Router::new()
        .route("/v1/suggest", post(suggest_handler))
        .route("/v1/simplify", post(simplify_handler))
        .route("/v1/health", get(health_handler))
        .route("/v1/reload", post(reload_handler))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(values: &[&str], formats: &[FormatId]) -> Vec<CellRecord> {
        values
            .iter()
            .zip(formats)
            .map(|(v, &f)| CellRecord {
                value: serde_json::Value::String(v.to_string()),
                cell_type: crate::column::CellType::Text,
                format: f,
            })
            .collect()
    }

    #[test]
    fn zero_observed_is_unprocessable() {
        let req = SuggestRequest {
            column: cells(&["a", "b"], &[0, 0]),
            observed: vec![],
            config: None,
            top_k: None,
            anchor: None,
        };
        let err = suggest(&Engine::default(), &req, 10).unwrap_err();
        assert_eq!(err.0, StatusCode::UNPROCESSABLE_ENTITY);
    }

    #[test]
    fn oversized_column_is_rejected() {
        let req = SuggestRequest {
            column: cells(&["a", "b", "c"], &[1, 0, 0]),
            observed: vec![0],
            config: None,
            top_k: None,
            anchor: None,
        };
        let err = suggest(&Engine::default(), &req, 2).unwrap_err();
        assert_eq!(err.0, StatusCode::PAYLOAD_TOO_LARGE);
    }

    #[test]
    fn ranker_override_is_rejected() {
        let mut config = serde_json::Map::new();
        config.insert("ranker_model".into(), serde_json::json!("/etc/passwd"));
        let req = SuggestRequest {
            column: cells(&["a", "b"], &[1, 0]),
            observed: vec![0],
            config: Some(config),
            top_k: None,
            anchor: None,
        };
        assert_eq!(suggest(&Engine::default(), &req, 10).unwrap_err().0, StatusCode::BAD_REQUEST);
    }

    #[test]
    fn hash_tracks_config() {
        let a = config_hash(&Engine::default());
        let cfg = EngineConfig {
            top_k: 7,
            ..EngineConfig::default()
        };
        let b = config_hash(&Engine::new(cfg).unwrap());
        assert_eq!(a.len(), 64);
        assert_ne!(a, b);
    }
}
