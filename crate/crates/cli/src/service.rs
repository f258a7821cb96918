//! HTTP/JSON service under `/v1`.
//!
//! | route            | body                                 | response                         |
//! |------------------|--------------------------------------|----------------------------------|
//! | `POST /v1/check` | `{"text", "options"?}`               | `CheckResponse`                  |
//! | `POST /v1/apply` | `{"text", "accepted": [...]}`        | `{"text"}`                       |
//! | `GET /v1/health` |                                      | `{"status", "lexicon_entries", "scorer"}` |
//! | `GET /v1/config` |                                      | effective settings, redacted     |
//!
//! Errors are `{"error": {"code", "message"}}` with a 4xx/5xx status.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use spellkit_core::pipeline::{AcceptedCorrection, CheckOptions, CheckResponse};
use spellkit_core::Engine;

use crate::config::EngineConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    pub text: String,
    #[serde(default)]
    pub options: CheckOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplyRequest {
    pub text: String,
    #[serde(default)]
    pub accepted: Vec<AcceptedCorrection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyResponse {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerHealth {
    pub backend: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub status: String,
    pub version: String,
    pub lexicon_entries: usize,
    pub scorer: ScorerHealth,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorBody<'a> {
    error: ErrorDetail<'a>,
}

#[derive(Debug, Clone, Serialize)]
struct ErrorDetail<'a> {
    code: &'a str,
    message: String,
}

pub struct ApiError {
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
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code,
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let status = r.status();
        let code = match status {
            StatusCode::PAYLOAD_TOO_LARGE => "payload_too_large",
            StatusCode::UNSUPPORTED_MEDIA_TYPE => "unsupported_media_type",
            StatusCode::UNPROCESSABLE_ENTITY => "invalid_request",
            _ => "malformed_json",
        };
        ApiError::new(status, code, r.body_text())
    }
}

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Engine>,
    config: Arc<serde_json::Value>,
}

impl AppState {
    pub fn new(engine: Arc<Engine>, config: &EngineConfig) -> Self {
        let view = serde_json::json!({
            "engine": config.redacted(),
            "effective_detector": engine.defaults(),
            "lexicon_entries": engine.lexicon().len(),
            "scorer_backend": engine.scorer().backend(),
            "index_depth": engine.index().max_dist(),
        });
        Self {
            engine,
            config: Arc::new(view),
        }
    }
}

pub fn router(state: AppState, max_body_bytes: usize) -> Router {
    Router::new()
        .route("/v1/check", post(check))
        .route("/v1/apply", post(apply))
        .route("/v1/health", get(health))
        .route("/v1/config", get(config))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(DefaultBodyLimit::max(max_body_bytes))
        .with_state(state)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))
}

async fn check(
    State(state): State<AppState>,
    body: Result<Json<CheckRequest>, JsonRejection>,
) -> Result<Json<CheckResponse>, ApiError> {
    let Json(req) = body?;
    let engine = state.engine.clone();
    let resp = blocking(move || engine.run_pipeline(&req.text, &req.options))
        .await?
        .map_err(|e| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_options",
                e.to_string(),
            )
        })?;
    if let Some(s) = resp.sentences.iter().find(|s| s.scorer_unavailable()) {
        let msg = s
            .error
            .as_ref()
            .map(|e| e.message.clone())
            .unwrap_or_default();
        return Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "scorer_unavailable",
            format!("sentence {}: {msg}", s.sentence_id),
        ));
    }
    Ok(Json(resp))
}

async fn apply(
    State(state): State<AppState>,
    body: Result<Json<ApplyRequest>, JsonRejection>,
) -> Result<Json<ApplyResponse>, ApiError> {
    let Json(req) = body?;
    let engine = state.engine.clone();
    let text = blocking(move || engine.apply(&req.text, &req.accepted))
        .await?
        .map_err(|e| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_correction",
                e.to_string(),
            )
        })?;
    Ok(Json(ApplyResponse { text }))
}

async fn health(
    State(state): State<AppState>,
) -> Result<(StatusCode, Json<HealthResponse>), ApiError> {
    let engine = state.engine.clone();
    let probe = blocking(move || engine.scorer().health()).await?;
    let backend = state.engine.scorer().backend().to_string();
    let (status, scorer) = match probe {
        Ok(()) => (
            StatusCode::OK,
            ScorerHealth {
                backend,
                status: "ok".into(),
                error: None,
            },
        ),
        Err(e) => (
            StatusCode::SERVICE_UNAVAILABLE,
            ScorerHealth {
                backend,
                status: "unavailable".into(),
                error: Some(e.to_string()),
            },
        ),
    };
    let body = HealthResponse {
        status: if status == StatusCode::OK {
            "ok"
        } else {
            "degraded"
        }
        .into(),
        version: env!("CARGO_PKG_VERSION").into(),
        lexicon_entries: state.engine.lexicon().len(),
        scorer,
    };
    Ok((status, Json(body)))
}

async fn config(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json((*state.config).clone())
}

/// Bind and serve until Ctrl-C.
pub async fn serve(state: AppState, bind: &str, max_body_bytes: usize) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state, max_body_bytes))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
