use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("generation prompt is empty")]
    EmptyPrompt,
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned an unexpected body: {0}")]
    Protocol(String),
    #[error("scripted provider exhausted at step {step} of a {len}-segment script")]
    ScriptExhausted { step: usize, len: usize },
    #[error("environment variable {0} holding the auth token is not set")]
    MissingToken(String),
    #[error("invalid provider configuration: {0}")]
    Config(String),
}

pub type Result<T, E = GatewayError> = std::result::Result<T, E>;
