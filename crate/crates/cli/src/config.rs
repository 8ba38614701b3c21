//! The run configuration file.
//!
//! Every section is optional. Unknown keys are rejected, and errors name the
//! dotted key path. Secrets never live in the file: a remote endpoint names
//! the environment variable holding its token (`api_key_env`), and only
//! secrets and endpoints may be overridden from the environment.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use hems_agent::{AgentConfig, AgentType};
use hems_core::{HemsModel, TariffSpec};
use hems_eval::GridConfig;
use hems_gateway::RemoteConfig;
use hems_simuser::DifficultyMode;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Token variable used when a remote endpoint does not name one.
pub const DEFAULT_TOKEN_ENV: &str = "HEMS_API_KEY";
pub const ENV_BASE_URL: &str = "HEMS_BASE_URL";
pub const ENV_USER_BASE_URL: &str = "HEMS_USER_BASE_URL";
pub const ENV_EMBEDDING_BASE_URL: &str = "HEMS_EMBEDDING_BASE_URL";
pub const ENV_BIND: &str = "HEMS_BIND";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderConfig {
    /// The built-in rule-based agent or the canned simulated user.
    #[default]
    Scripted,
    Remote(RemoteConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingConfig {
    Toy {
        dimension: usize,
    },
    Remote {
        dimension: usize,
        endpoint: RemoteConfig,
    },
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self::Toy { dimension: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub dt_hours: f64,
    pub seed: u64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            dt_hours: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub agent_types: Vec<AgentType>,
    pub difficulties: Vec<DifficultyMode>,
    pub trials: u32,
    pub seed: u64,
    pub strict: bool,
    pub workers: Option<usize>,
    /// Personas sampled for the answer-precision table; 0 skips it.
    pub precision_trials: u32,
    pub output_dir: PathBuf,
}

impl Default for EvalSection {
    fn default() -> Self {
        let grid = GridConfig::default();
        Self {
            agent_types: grid.agent_types,
            difficulties: grid.difficulties,
            trials: grid.trials,
            seed: grid.seed,
            strict: grid.strict,
            workers: grid.workers,
            precision_trials: grid.trials,
            output_dir: PathBuf::from("reports"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceSection {
    pub bind: String,
    pub ttl_secs: u64,
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for ServiceSection {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            ttl_secs: 3600,
            snapshot_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Backend of the parameter-retrieval agent.
    pub provider: ProviderConfig,
    /// Backend of the simulated user during evaluation.
    pub user_provider: ProviderConfig,
    pub embedding: EmbeddingConfig,
    pub agent: AgentConfig,
    pub model: HemsModel,
    pub tariff: TariffSpec,
    pub scenario: ScenarioSection,
    pub eval: EvalSection,
    pub service: ServiceSection,
    /// Feasibility tolerance for solver output.
    pub tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            provider: ProviderConfig::default(),
            user_provider: ProviderConfig::default(),
            embedding: EmbeddingConfig::default(),
            agent: AgentConfig::default(),
            model: HemsModel::default(),
            tariff: TariffSpec::default(),
            scenario: ScenarioSection::default(),
            eval: EvalSection::default(),
            service: ServiceSection::default(),
            tolerance: hems_core::DEFAULT_TOLERANCE,
        }
    }
}

fn config_error(path: &str, message: impl ToString) -> CliError {
    CliError::Config {
        path: Some(path.to_owned()),
        message: message.to_string(),
    }
}

impl RunConfig {
    /// Parses and validates TOML text. Environment overrides are not applied.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config {
            path: None,
            message: e.to_string(),
        })?;
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let mut message = e.inner().to_string().trim().to_owned();
            if ["api_key`", "token`", "password`"]
                .iter()
                .any(|k| message.contains(k))
            {
                message.push_str(" (tokens are read from the environment: set `api_key_env`)");
            }
            CliError::Config {
                path: (path != ".").then_some(path),
                message,
            }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml(&text)
    }

    /// Loads `path` if given, otherwise the defaults, then applies the
    /// process environment.
    pub fn resolve(path: Option<&Path>) -> Result<Self, CliError> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok());
        config.validate()?;
        Ok(config)
    }

    /// Endpoint URLs and token variable names from the environment.
    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) {
        let token_default = env(DEFAULT_TOKEN_ENV).map(|_| DEFAULT_TOKEN_ENV.to_owned());
        let endpoint = |remote: &mut RemoteConfig, url_var: &str| {
            if let Some(url) = env(url_var) {
                remote.base_url = url;
            }
            if remote.api_key_env.is_none() {
                remote.api_key_env = token_default.clone();
            }
        };
        if let ProviderConfig::Remote(r) = &mut self.provider {
            endpoint(r, ENV_BASE_URL);
        }
        if let ProviderConfig::Remote(r) = &mut self.user_provider {
            endpoint(r, ENV_USER_BASE_URL);
        }
        if let EmbeddingConfig::Remote { endpoint: r, .. } = &mut self.embedding {
            endpoint(r, ENV_EMBEDDING_BASE_URL);
        }
        if let Some(bind) = env(ENV_BIND) {
            self.service.bind = bind;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.agent
            .validate()
            .map_err(|e| config_error("agent", e))?;
        self.model
            .validate()
            .map_err(|e| config_error("model", e))?;
        self.tariff
            .validate()
            .map_err(|e| config_error("tariff", e))?;
        for (path, provider) in [
            ("provider", &self.provider),
            ("user_provider", &self.user_provider),
        ] {
            if let ProviderConfig::Remote(r) = provider {
                validate_remote(path, r)?;
            }
        }
        match &self.embedding {
            EmbeddingConfig::Toy { dimension } | EmbeddingConfig::Remote { dimension, .. }
                if *dimension == 0 =>
            {
                return Err(config_error("embedding.dimension", "must be at least 1"));
            }
            EmbeddingConfig::Remote { endpoint, .. } => {
                validate_remote("embedding.endpoint", endpoint)?
            }
            EmbeddingConfig::Toy { .. } => {}
        }
        check_dt(self.scenario.dt_hours).map_err(|e| config_error("scenario.dt_hours", e))?;
        self.grid()
            .validate()
            .map_err(|e| config_error("eval", e))?;
        self.service
            .bind
            .parse::<SocketAddr>()
            .map_err(|e| config_error("service.bind", format!("`{}`: {e}", self.service.bind)))?;
        if self.service.ttl_secs == 0 {
            return Err(config_error("service.ttl_secs", "must be positive"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(config_error("tolerance", "must be positive"));
        }
        Ok(())
    }

    /// The evaluation grid; agents share the `[agent]` settings.
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            agent_types: self.eval.agent_types.clone(),
            difficulties: self.eval.difficulties.clone(),
            trials: self.eval.trials,
            seed: self.eval.seed,
            strict: self.eval.strict,
            workers: self.eval.workers,
            agent: self.agent.clone(),
        }
    }

    pub fn service_config(&self) -> hems_service::ServiceConfig {
        hems_service::ServiceConfig {
            agent: self.agent.clone(),
            model: self.model,
            tariff: self.tariff.clone(),
            dt_hours: self.scenario.dt_hours,
            scenario_seed: self.scenario.seed,
            ttl_secs: self.service.ttl_secs,
            snapshot_dir: self.service.snapshot_dir.clone(),
            tolerance: self.tolerance,
        }
    }
}

/// A step length must split a day into whole steps.
pub fn check_dt(dt: f64) -> Result<(), String> {
    let per_day = 24.0 / dt;
    if dt > 0.0 && (per_day - per_day.round()).abs() < 1e-9 {
        Ok(())
    } else {
        Err(format!("{dt} h does not divide a day"))
    }
}

fn validate_remote(path: &str, r: &RemoteConfig) -> Result<(), CliError> {
    if !(r.base_url.starts_with("http://") || r.base_url.starts_with("https://")) {
        return Err(config_error(
            &format!("{path}.base_url"),
            format!("`{}` is not an http(s) URL", r.base_url),
        ));
    }
    if r.model.trim().is_empty() {
        return Err(config_error(&format!("{path}.model"), "must not be empty"));
    }
    if !(r.timeout_secs > 0.0 && r.timeout_secs.is_finite()) {
        return Err(config_error(
            &format!("{path}.timeout_secs"),
            "must be positive",
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(err: CliError) -> Option<String> {
        match err {
            CliError::Config { path, .. } => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn sections_round_trip() {
        let text = r#"
            tolerance = 1e-7
            [provider]
            kind = "remote"
            base_url = "http://localhost:8000/v1"
            model = "local"
            api_key_env = "MY_TOKEN"
            [embedding]
            kind = "remote"
            dimension = 384
            [embedding.endpoint]
            base_url = "http://localhost:8001/v1"
            model = "embed"
            [agent]
            agent_type = "act"
            n_iter = 6
            [eval]
            trials = 3
            difficulties = ["easy", "hard"]
            [service]
            bind = "0.0.0.0:9000"
        "#;
        let c = RunConfig::from_toml(text).unwrap();
        match &c.provider {
            ProviderConfig::Remote(r) => assert_eq!(r.api_key_env.as_deref(), Some("MY_TOKEN")),
            other => panic!("{other:?}"),
        }
        assert_eq!(c.agent.agent_type, AgentType::Act);
        assert_eq!(c.grid().agent.n_iter, 6);
        assert_eq!(
            c.eval.difficulties,
            [DifficultyMode::Easy, DifficultyMode::Hard]
        );
        let back = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_toml(&back).unwrap(), c);
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let err = RunConfig::from_toml("[agent]\nn_iters = 3\n").unwrap_err();
        assert!(err.to_string().contains("n_iters"), "{err}");
        assert_eq!(path_of(err).as_deref(), Some("agent.n_iters"));

        let err = RunConfig::from_toml("[eval]\ntrials = \"many\"\n").unwrap_err();
        assert_eq!(path_of(err).as_deref(), Some("eval.trials"));

        let err = RunConfig::from_toml("colour = 1\n").unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn plaintext_tokens_are_refused() {
        let text = "[provider]\nkind = \"remote\"\nbase_url = \"http://x\"\nmodel = \"m\"\napi_key = \"sk-123\"\n";
        let err = RunConfig::from_toml(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("api_key_env"), "{msg}");
        assert!(!msg.contains("sk-123"));
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let cases = [
            ("[scenario]\ndt_hours = 0.7\n", "scenario.dt_hours"),
            ("[service]\nbind = \"nowhere\"\n", "service.bind"),
            ("[agent]\nn_iter = 0\n", "agent"),
            ("[eval]\ntrials = 0\n", "eval"),
            (
                "[embedding]\nkind = \"toy\"\ndimension = 0\n",
                "embedding.dimension",
            ),
            ("[tariff]\npeak_price = 0.01\n", "tariff"),
            (
                "[provider]\nkind = \"remote\"\nbase_url = \"localhost\"\nmodel = \"m\"\n",
                "provider.base_url",
            ),
        ];
        for (text, path) in cases {
            let err = RunConfig::from_toml(text).unwrap_err();
            assert_eq!(err.exit_code(), 2);
            assert_eq!(path_of(err).as_deref(), Some(path), "{text}");
        }
    }

    #[test]
    fn env_overrides_only_endpoints_and_token_names() {
        let mut c = RunConfig::from_toml(
            "[provider]\nkind = \"remote\"\nbase_url = \"http://a\"\nmodel = \"m\"\n[agent]\nn_iter = 5\n",
        )
        .unwrap();
        c.apply_env(|k| match k {
            ENV_BASE_URL => Some("http://b".into()),
            DEFAULT_TOKEN_ENV => Some("secret".into()),
            ENV_BIND => Some("127.0.0.1:1".into()),
            _ => None,
        });
        match &c.provider {
            ProviderConfig::Remote(r) => {
                assert_eq!(r.base_url, "http://b");
                assert_eq!(r.api_key_env.as_deref(), Some(DEFAULT_TOKEN_ENV));
                assert_eq!(r.model, "m");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(c.service.bind, "127.0.0.1:1");
        assert_eq!(c.agent.n_iter, 5);
        assert!(!toml::to_string(&c).unwrap().contains("secret"));
    }
}
