//! Evaluation of the parameter dialogue.
//!
//! [`run_grid`] plays every (agent type, difficulty, trial) cell against a
//! simulated user and records what was stored. [`accuracy`] turns the trial
//! results into the summary tables, [`precision`] scores how close user
//! answers are to the ideal ones, and [`report`] writes everything to disk.

pub mod compare;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod precision;
pub mod report;

pub use compare::{canonicalize, values_match};
pub use error::EvalError;
pub use grid::{run_grid, GridConfig, ParameterResult, Providers, TrialResult, UserProvider};
pub use metrics::{accuracy, accuracy_table, AccuracyRow, ParameterRow, SummaryRow};
pub use precision::{
    cosine_precision, precision_corpus, precision_table, PrecisionRow, PrecisionSample,
};
pub use report::{strip_duration_columns, strip_durations, Report, REPORT_FILES};
