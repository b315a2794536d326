//! Review service over a run directory.
//!
//! | Method | Path | |
//! |---|---|---|
//! | GET | `/api/v1/runs` | saved runs with pending counts |
//! | GET | `/api/v1/runs/{run_id}/records?status=pending` | records, filtered by review status |
//! | GET | `/api/v1/records/{record_id}` | one record with its decision |
//! | GET | `/api/v1/records/{record_id}/pages/{n}.png` | a source page as the model saw it |
//! | POST | `/api/v1/records/{record_id}/decision` | confirm or correct a record |
//! | GET | `/api/v1/export/suggestions` | prompt refinements derived from corrections |
//!
//! Every JSON body carries `schema_version`. Errors are
//! `{"schema_version": 1, "error": "..."}` with 400, 404, 409 or 422.

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pagewise_core::{ExtractionRecord, ReviewDecision};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::review::{DecisionInput, ReviewError, ReviewStore, StatusFilter};
use crate::{PipelineError, API_SCHEMA_VERSION};

type Store = Arc<ReviewStore>;

/// A record as the review UI consumes it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordView {
    #[serde(flatten)]
    pub record: ExtractionRecord,
    /// `pending`, `confirmed` or `corrected`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<ReviewDecision>,
    /// Image URL per source page.
    pub page_urls: Vec<String>,
}

impl RecordView {
    fn new(record: ExtractionRecord, decision: Option<ReviewDecision>) -> RecordView {
        let status = match &decision {
            None => "pending".to_string(),
            Some(d) => serde_json::to_value(d.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        };
        let page_urls = record
            .source_pages
            .iter()
            .map(|p| format!("/api/v1/records/{}/pages/{p}.png", record.record_id))
            .collect();
        RecordView {
            record,
            status,
            decision,
            page_urls,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RecordsQuery {
    status: Option<StatusFilter>,
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.0,
            Json(json!({"schema_version": API_SCHEMA_VERSION, "error": self.1})),
        )
            .into_response()
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> ApiError {
        let code = match &e {
            ReviewError::UnknownRecord(_) => StatusCode::NOT_FOUND,
            ReviewError::AlreadyDecided(_) => StatusCode::CONFLICT,
            ReviewError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ReviewError::Pipeline(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

fn not_found(what: String) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what)
}

/// The API routes, plus the static review UI from `ui_dir` when given.
pub fn router(store: Arc<ReviewStore>, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/v1/runs", get(list_runs))
        .route("/api/v1/runs/{run_id}/records", get(run_records))
        .route("/api/v1/records/{record_id}", get(one_record))
        .route("/api/v1/records/{record_id}/pages/{file}", get(page_image))
        .route("/api/v1/records/{record_id}/decision", post(submit_decision))
        .route("/api/v1/export/suggestions", get(suggestions))
        .with_state(store);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(store: ReviewStore, addr: SocketAddr, ui_dir: Option<&Path>) -> Result<(), PipelineError> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| PipelineError::Config(format!("cannot bind {addr}: {e}")))?;
    tracing::info!(%addr, "review service listening");
    axum::serve(listener, router(Arc::new(store), ui_dir))
        .await
        .map_err(|e| PipelineError::Config(format!("server error: {e}")))
}

async fn list_runs(State(store): State<Store>) -> Json<serde_json::Value> {
    Json(json!({"schema_version": API_SCHEMA_VERSION, "runs": store.runs()}))
}

async fn run_records(
    State(store): State<Store>,
    UrlPath(run_id): UrlPath<String>,
    Query(q): Query<RecordsQuery>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let filter = q.status.unwrap_or(StatusFilter::All);
    let rows = store
        .records(&run_id, filter)
        .ok_or_else(|| not_found(format!("unknown run {run_id}")))?;
    let records: Vec<RecordView> = rows.into_iter().map(|(r, d)| RecordView::new(r, d)).collect();
    Ok(Json(json!({
        "schema_version": API_SCHEMA_VERSION,
        "run_id": run_id,
        "records": records,
    })))
}

async fn one_record(
    State(store): State<Store>,
    UrlPath(record_id): UrlPath<String>,
) -> Result<Json<serde_json::Value>, ApiError> {
    let (r, d) = store
        .record(&record_id)
        .ok_or_else(|| not_found(format!("unknown record {record_id}")))?;
    Ok(Json(json!({
        "schema_version": API_SCHEMA_VERSION,
        "record": RecordView::new(r, d),
    })))
}

async fn page_image(
    State(store): State<Store>,
    UrlPath((record_id, file)): UrlPath<(String, String)>,
) -> Result<Response, ApiError> {
    let page: usize = file
        .strip_suffix(".png")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, format!("expected <page>.png, got {file}")))?;
    let path = store
        .page_image(&record_id, page)
        .ok_or_else(|| not_found(format!("record {record_id} has no source page {page}")))?;
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| not_found(format!("{}: {e}", path.display())))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn submit_decision(
    State(store): State<Store>,
    UrlPath(record_id): UrlPath<String>,
    body: Result<Json<DecisionInput>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let Json(input) = body.map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.body_text()))?;
    // Appending syncs the log to disk; keep that off the async workers.
    let decision = tokio::task::spawn_blocking(move || store.decide(&record_id, input))
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok((
        StatusCode::CREATED,
        Json(json!({"schema_version": API_SCHEMA_VERSION, "decision": decision})),
    ))
}

async fn suggestions(State(store): State<Store>) -> Json<serde_json::Value> {
    Json(json!({"schema_version": API_SCHEMA_VERSION, "suggestions": store.suggestions()}))
}
