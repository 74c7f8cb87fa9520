use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use landscape::Error;
use serde::{Deserialize, Serialize};

/// The closed set of error codes returned by the gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Malformed request or invalid parameter (400).
    BadRequest,
    /// Unknown session, iteration, corpus or endpoint (404).
    NotFound,
    /// Operation not allowed in the session's current status (409).
    InvalidState,
    /// Resource already exists (409).
    Conflict,
    /// Request was well formed but the data cannot be used (422).
    InvalidData,
    /// Server-side failure (500).
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::InvalidState | ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::InvalidData => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidState(_) => ErrorCode::InvalidState,
            Error::NotFound(_) => ErrorCode::NotFound,
            Error::InvalidParameter(_) | Error::Query(_) => ErrorCode::BadRequest,
            Error::Io { .. } | Error::HashMismatch { .. } | Error::Corrupt { .. } => {
                ErrorCode::Internal
            }
            _ => ErrorCode::InvalidData,
        };
        ApiError::new(code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.code == ErrorCode::Internal {
            tracing::error!(message = %self.message, "request failed");
        }
        (self.code.status(), Json(self)).into_response()
    }
}
