use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;
use yogyata_core::analyzer::AnalysisError;
use yogyata_core::StoreError;

/// Error body: a stable code, a human message, and the offending field
/// when there is one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, body: ErrorBody { error, message: message.into(), field: None, detail: None } }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "a live session token is required")
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn with_field(mut self, field: &'static str) -> Self {
        self.body.field = Some(field);
        self
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.body.detail = Some(detail);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e.root_cause() {
            StoreError::Validation(v) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", message).with_field(v.field())
            }
            StoreError::NotFound { .. } => ApiError::not_found(message),
            StoreError::Duplicate { existing, .. } => ApiError::new(StatusCode::CONFLICT, "duplicate", message)
                .with_detail(serde_json::json!({ "existing": existing })),
            StoreError::Parse(_) | StoreError::InvalidRecord { .. } => ApiError::bad_request(message),
            StoreError::Corrupt { .. } | StoreError::Io(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", message)
            }
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        let message = e.to_string();
        match e {
            AnalysisError::NoAnalysis(report) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "no_analysis", message)
                .with_detail(serde_json::to_value(&*report).expect("report serializes")),
            AnalysisError::UnknownDhatu(_) | AnalysisError::UnknownLexeme(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_entry", message)
            }
            AnalysisError::BadSenseHint { .. } => ApiError::bad_request(message).with_field("sense_hints"),
            AnalysisError::NoVerb
            | AnalysisError::NoReadings { .. }
            | AnalysisError::CaseOutOfRange { .. }
            | AnalysisError::PersonOutOfRange { .. } => ApiError::bad_request(message).with_field("tokens"),
        }
    }
}
