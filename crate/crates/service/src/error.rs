use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use bcfuse_core::ingest::BcmError;
use bcfuse_core::merge::MergeError;
use bcfuse_core::pipeline::PipelineError;
use bcfuse_core::resolve::{DecideError, ResolveError};
use serde::Serialize;
use serde_json::{json, Value};

/// Error body: `{code, message, detail}`.
///
/// | code | status |
/// |------|--------|
/// | `BAD_REQUEST` | 400 |
/// | `PARSE_ERROR` | 400 |
/// | `INVALID_MODEL` | 422 |
/// | `INVALID_INPUT` | 422 |
/// | `SESSION_NOT_FOUND` | 404 |
/// | `CONFLICT_NOT_FOUND` | 404 |
/// | `ILLEGAL_ACTION` | 422 |
/// | `ALREADY_DECIDED` | 409 |
/// | `SESSION_FINALIZED` | 409 |
/// | `PENDING_CONFLICTS` | 409 |
/// | `MERGE_INVALID` | 422 |
/// | `HISTORY_IO` | 500 |
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "BAD_REQUEST", message)
    }

    pub fn session_not_found(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "SESSION_NOT_FOUND",
            format!("no session `{id}`"),
        )
        .with_detail(json!({ "session": id }))
    }

    pub fn finalized() -> Self {
        Self::new(
            StatusCode::CONFLICT,
            "SESSION_FINALIZED",
            "session is finalized; decisions can no longer change",
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

fn resolve_error(index: usize, e: &ResolveError) -> ApiError {
    match e {
        ResolveError::AlreadyDecided => {
            ApiError::new(StatusCode::CONFLICT, "ALREADY_DECIDED", e.to_string())
        }
        ResolveError::IllegalAction { action, reason } => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "ILLEGAL_ACTION",
            e.to_string(),
        )
        .with_detail(json!({ "conflict": index, "action": action, "reason": reason })),
        ResolveError::UnknownAction(_) | ResolveError::BadThreshold => ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "ILLEGAL_ACTION",
            e.to_string(),
        ),
    }
    .tap_detail(json!({ "conflict": index }))
}

impl ApiError {
    /// Sets the detail only when none was given.
    fn tap_detail(self, detail: Value) -> Self {
        if self.detail.is_null() {
            self.with_detail(detail)
        } else {
            self
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match e {
            PipelineError::Component { origin, error } => match error {
                BcmError::Syntax(s) => {
                    ApiError::new(StatusCode::BAD_REQUEST, "PARSE_ERROR", message).with_detail(
                        json!({
                            "input": origin,
                            "line": s.line,
                            "column": s.column,
                            "expected": s.expected,
                            "found": s.found,
                        }),
                    )
                }
                BcmError::Invalid(findings) => {
                    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_MODEL", message)
                        .with_detail(json!({ "input": origin, "findings": findings }))
                }
            },
            PipelineError::NoSuchConflict { index, count } => {
                ApiError::new(StatusCode::NOT_FOUND, "CONFLICT_NOT_FOUND", message)
                    .with_detail(json!({ "conflict": index, "count": count }))
            }
            PipelineError::Decide { index, error } => match error {
                DecideError::Resolve(r) => resolve_error(index, &r),
                DecideError::History(h) => ApiError::new(
                    StatusCode::INTERNAL_SERVER_ERROR,
                    "HISTORY_IO",
                    h.to_string(),
                ),
            },
            PipelineError::Merge(MergeError::Undecided(pending)) => {
                ApiError::new(StatusCode::CONFLICT, "PENDING_CONFLICTS", message)
                    .with_detail(json!({ "pending": pending }))
            }
            PipelineError::Merge(MergeError::Invalid(findings)) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "MERGE_INVALID", message)
                    .with_detail(json!({ "findings": findings }))
            }
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_INPUT", message),
        }
    }
}
