use hems_agent::{Outcome, RetrievalError, RetrievalFailure};
use hems_core::HemsError;
use hems_eval::EvalError;
use hems_gateway::GatewayError;
use thiserror::Error;

/// Command failures, one variant per exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {message}", path.as_ref().map(|p| format!(" at `{p}`")).unwrap_or_default())]
    Config {
        path: Option<String>,
        message: String,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Parse(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Provider(_) => 5,
            CliError::Other(_) => 1,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            path: None,
            message: message.into(),
        }
    }
}

impl From<HemsError> for CliError {
    fn from(e: HemsError) -> Self {
        match e {
            HemsError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            HemsError::Parse { .. }
            | HemsError::InvalidParameters(_)
            | HemsError::InvalidScenario { .. }
            | HemsError::HorizonNotCovered(_) => CliError::Parse(e.to_string()),
            HemsError::InvalidModel(_) => CliError::Config {
                path: Some("model".into()),
                message: e.to_string(),
            },
            HemsError::Solver(_) | HemsError::Io(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<GatewayError> for CliError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::MissingToken(_) | GatewayError::Config(_) => {
                CliError::config(e.to_string())
            }
            _ => CliError::Provider(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Config(m) => CliError::Config {
                path: Some("eval".into()),
                message: m,
            },
            EvalError::Embedding(_) => CliError::Provider(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<RetrievalFailure> for CliError {
    fn from(f: RetrievalFailure) -> Self {
        let provider_failed = f
            .report
            .as_ref()
            .is_some_and(|r| r.traces.iter().any(|t| t.outcome == Outcome::ProviderError));
        match f.error {
            _ if provider_failed => {
                CliError::Provider(format!("{} (the generation backend failed)", f.error))
            }
            // the user's answers were retrieved but do not form a valid input
            RetrievalError::Invalid(e) => CliError::from(e),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hems_core::InfeasibilityClass;

    #[test]
    fn classes_have_distinct_codes() {
        let errors = [
            CliError::config("x"),
            CliError::Parse("x".into()),
            CliError::Infeasible("x".into()),
            CliError::Provider("x".into()),
            CliError::Other("x".into()),
        ];
        let mut codes: Vec<u8> = errors.iter().map(CliError::exit_code).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes, [1, 2, 3, 4, 5]);
    }

    #[test]
    fn core_errors_map_by_kind() {
        let infeasible = HemsError::Infeasible {
            class: InfeasibilityClass::EvBoundary,
            detail: "short".into(),
        };
        assert_eq!(CliError::from(infeasible).exit_code(), 4);
        let parse = HemsError::Parse {
            line: 3,
            message: "bad".into(),
        };
        assert_eq!(CliError::from(parse).exit_code(), 3);
        assert_eq!(CliError::from(HemsError::Solver("x".into())).exit_code(), 1);
        let err = CliError::Config {
            path: Some("agent.n_iter".into()),
            message: "too small".into(),
        };
        assert_eq!(err.to_string(), "config error at `agent.n_iter`: too small");
    }
}
