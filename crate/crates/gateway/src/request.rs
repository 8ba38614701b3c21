use serde::{Deserialize, Serialize};

use crate::error::{GatewayError, Result};

/// One completion request. `options` is passed to remote endpoints verbatim
/// (temperature, top_p, seed, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub stop: Vec<String>,
    pub max_tokens: u32,
    #[serde(default)]
    pub options: serde_json::Map<String, serde_json::Value>,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, stop: Vec<String>, max_tokens: u32) -> Result<Self> {
        let prompt = prompt.into();
        if prompt.is_empty() {
            return Err(GatewayError::EmptyPrompt);
        }
        Ok(Self {
            prompt,
            stop,
            max_tokens,
            options: serde_json::Map::new(),
        })
    }

    pub fn with_options(mut self, options: serde_json::Map<String, serde_json::Value>) -> Self {
        self.options = options;
        self
    }
}

/// Cuts `text` at the earliest occurrence of any stop sequence.
pub fn truncate_at_stops<'a>(text: &'a str, stops: &[String]) -> &'a str {
    let cut = stops
        .iter()
        .filter(|s| !s.is_empty())
        .filter_map(|s| text.find(s.as_str()))
        .min()
        .unwrap_or(text.len());
    &text[..cut]
}

/// A text generation backend. Implementations must be safe to share across
/// concurrent sessions.
pub trait TextGenerator: Send + Sync {
    /// Provider output before stop handling.
    fn complete(&self, request: &GenerationRequest) -> Result<String>;

    /// Model identity as configured, for reports.
    fn model_name(&self) -> &str;

    fn generate(&self, request: &GenerationRequest) -> Result<String> {
        if request.prompt.is_empty() {
            return Err(GatewayError::EmptyPrompt);
        }
        let raw = self.complete(request)?;
        Ok(truncate_at_stops(&raw, &request.stop).to_owned())
    }
}

impl<T: TextGenerator + ?Sized> TextGenerator for std::sync::Arc<T> {
    fn complete(&self, request: &GenerationRequest) -> Result<String> {
        (**self).complete(request)
    }
    fn model_name(&self) -> &str {
        (**self).model_name()
    }
}

impl<T: TextGenerator + ?Sized> TextGenerator for &T {
    fn complete(&self, request: &GenerationRequest) -> Result<String> {
        (**self).complete(request)
    }
    fn model_name(&self) -> &str {
        (**self).model_name()
    }
}
