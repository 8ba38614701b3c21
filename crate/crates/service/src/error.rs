use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

/// Body of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Machine-readable, stable across releases.
    pub code: String,
    pub message: String,
}

impl ErrorBody {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_owned(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("no session with id `{0}`")]
    UnknownSession(String),
    #[error("{0}")]
    WrongState(String),
    #[error("the session is processing another request")]
    Busy,
    #[error("{0}")]
    InvalidRequest(String),
    #[error("the schedule is not available: {0}")]
    ScheduleNotReady(String),
    #[error("{0}")]
    ProviderUnavailable(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSession(_) => "unknown_session",
            Self::WrongState(_) => "wrong_state",
            Self::Busy => "session_busy",
            Self::InvalidRequest(_) => "invalid_request",
            Self::ScheduleNotReady(_) => "schedule_not_ready",
            Self::ProviderUnavailable(_) => "provider_unavailable",
            Self::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            Self::UnknownSession(_) => StatusCode::NOT_FOUND,
            Self::WrongState(_) | Self::Busy | Self::ScheduleNotReady(_) => StatusCode::CONFLICT,
            Self::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            Self::ProviderUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            Self::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status(),
            Json(ErrorBody::new(self.code(), self.to_string())),
        )
            .into_response()
    }
}
