use std::fmt;

use thiserror::Error;

/// Which family of constraints made a problem infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibilityClass {
    /// The EV cannot be fully charged before it leaves.
    EvBoundary,
    /// The house temperature cannot be kept inside the comfort band.
    Temperature,
    /// Anything else (variable bounds, solver numerics).
    Bounds,
}

impl fmt::Display for InfeasibilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InfeasibilityClass::EvBoundary => "ev_boundary",
            InfeasibilityClass::Temperature => "temperature",
            InfeasibilityClass::Bounds => "bounds",
        })
    }
}

#[derive(Debug, Error)]
pub enum HemsError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid scenario: {message}{}", step_suffix(*.step))]
    InvalidScenario {
        message: String,
        step: Option<usize>,
    },

    #[error("scenario does not cover the requested horizon: {0}")]
    HorizonNotCovered(String),

    #[error("infeasible ({class}): {detail}")]
    Infeasible {
        class: InfeasibilityClass,
        detail: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn step_suffix(step: Option<usize>) -> String {
    match step {
        Some(s) => format!(" (step {s})"),
        None => String::new(),
    }
}

impl HemsError {
    pub(crate) fn scenario(message: impl Into<String>, step: Option<usize>) -> Self {
        HemsError::InvalidScenario {
            message: message.into(),
            step,
        }
    }

    pub(crate) fn infeasible(class: InfeasibilityClass, detail: impl Into<String>) -> Self {
        HemsError::Infeasible {
            class,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = HemsError> = std::result::Result<T, E>;
