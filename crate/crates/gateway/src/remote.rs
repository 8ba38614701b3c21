use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::embed::{Embedder, EmbeddingVector};
use crate::error::{GatewayError, Result};
use crate::request::{GenerationRequest, TextGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatStyle {
    /// `POST {base}/completions` with a raw prompt. Suits chat-template
    /// prompts that are already rendered.
    #[default]
    Completions,
    /// `POST {base}/chat/completions` with the prompt as one user message.
    Chat,
}

/// Endpoint settings. The auth token is never part of the config: only the
/// name of the environment variable that holds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub style: ChatStyle,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    2
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            api_key_env: None,
            style: ChatStyle::default(),
        }
    }
}

struct Client {
    http: reqwest::blocking::Client,
    base_url: String,
    token: Option<String>,
    max_retries: u32,
}

impl std::fmt::Debug for Client {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Client")
            .field("base_url", &self.base_url)
            .field("token", &self.token.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl Client {
    fn new(config: &RemoteConfig) -> Result<Self> {
        if config.timeout_secs.is_nan() || config.timeout_secs <= 0.0 {
            return Err(GatewayError::Config("timeout_secs must be positive".into()));
        }
        let token = match &config.api_key_env {
            Some(var) => {
                Some(std::env::var(var).map_err(|_| GatewayError::MissingToken(var.clone()))?)
            }
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            http,
            base_url: config.base_url.trim_end_matches('/').to_owned(),
            token,
            max_retries: config.max_retries,
        })
    }

    /// POSTs `body`, retrying transport failures and 5xx responses.
    fn post(&self, path: &str, body: &Value) -> Result<Value> {
        let url = format!("{}/{}", self.base_url, path);
        let attempts = self.max_retries + 1;
        let mut last = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 << attempt.min(5)));
            }
            let mut req = self.http.post(&url).json(body);
            if let Some(token) = &self.token {
                req = req.bearer_auth(token);
            }
            match req.send() {
                Ok(resp) if resp.status().is_server_error() => {
                    last = format!("HTTP {}", resp.status());
                }
                Ok(resp) if !resp.status().is_success() => {
                    let status = resp.status();
                    let text = resp.text().unwrap_or_default();
                    return Err(GatewayError::Protocol(format!("HTTP {status}: {text}")));
                }
                Ok(resp) => {
                    return resp
                        .json::<Value>()
                        .map_err(|e| GatewayError::Protocol(e.to_string()))
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(GatewayError::Transport {
            attempts,
            message: last,
        })
    }
}

/// Generation through an OpenAI-compatible HTTP endpoint.
#[derive(Debug)]
pub struct RemoteGenerator {
    client: Client,
    model: String,
    style: ChatStyle,
}

impl RemoteGenerator {
    pub fn new(config: &RemoteConfig) -> Result<Self> {
        Ok(Self {
            client: Client::new(config)?,
            model: config.model.clone(),
            style: config.style,
        })
    }
}

impl TextGenerator for RemoteGenerator {
    fn complete(&self, request: &GenerationRequest) -> Result<String> {
        let mut body = match self.style {
            ChatStyle::Completions => json!({
                "model": self.model,
                "prompt": request.prompt,
            }),
            ChatStyle::Chat => json!({
                "model": self.model,
                "messages": [{"role": "user", "content": request.prompt}],
            }),
        };
        let obj = body.as_object_mut().expect("object literal");
        obj.insert("max_tokens".into(), request.max_tokens.into());
        if !request.stop.is_empty() {
            obj.insert("stop".into(), json!(request.stop));
        }
        for (k, v) in &request.options {
            obj.entry(k.clone()).or_insert_with(|| v.clone());
        }

        let (path, pointer) = match self.style {
            ChatStyle::Completions => ("completions", "/choices/0/text"),
            ChatStyle::Chat => ("chat/completions", "/choices/0/message/content"),
        };
        let resp = self.client.post(path, &body)?;
        resp.pointer(pointer)
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| GatewayError::Protocol(format!("missing {pointer} in response")))
    }

    fn model_name(&self) -> &str {
        &self.model
    }
}

/// Embeddings through an OpenAI-compatible `POST {base}/embeddings`.
#[derive(Debug)]
pub struct RemoteEmbedder {
    client: Client,
    model: String,
    dimension: usize,
}

impl RemoteEmbedder {
    /// `dimension` is the model's output size; responses of another size are
    /// rejected.
    pub fn new(config: &RemoteConfig, dimension: usize) -> Result<Self> {
        Ok(Self {
            client: Client::new(config)?,
            model: config.model.clone(),
            dimension,
        })
    }
}

impl Embedder for RemoteEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let resp = self
            .client
            .post("embeddings", &json!({"model": self.model, "input": text}))?;
        let v: Vec<f64> = resp
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| GatewayError::Protocol("missing /data/0/embedding".into()))?
            .iter()
            .map(|x| x.as_f64().filter(|f| f.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| GatewayError::Protocol("non-numeric embedding entry".into()))?;
        if v.len() != self.dimension {
            return Err(GatewayError::Protocol(format!(
                "expected {} dimensions, got {}",
                self.dimension,
                v.len()
            )));
        }
        Ok(v)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}
