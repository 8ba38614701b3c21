//! Report files: `report.json` with everything, and CSV tables for
//! spreadsheets and plotting.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::EvalError;
use crate::grid::{GridConfig, TrialResult};
use crate::metrics::{accuracy, accuracy_table, AccuracyRow, ParameterRow, SummaryRow};
use crate::precision::PrecisionRow;

pub const REPORT_FILES: [&str; 6] = [
    "report.json",
    "accuracy.csv",
    "summary.csv",
    "per_parameter.csv",
    "boxplot.csv",
    "precision.csv",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub model: String,
    pub config: GridConfig,
    pub accuracy: Vec<AccuracyRow>,
    pub summary: Vec<SummaryRow>,
    pub per_parameter: Vec<ParameterRow>,
    pub precision: Vec<PrecisionRow>,
    /// (agent type, difficulty, trial) of each aborted trial.
    pub aborted: Vec<(String, String, u32)>,
    pub trials: Vec<TrialResult>,
}

impl Report {
    pub fn new(
        model: impl Into<String>,
        config: GridConfig,
        trials: Vec<TrialResult>,
        precision: Vec<PrecisionRow>,
    ) -> Result<Self, EvalError> {
        let model = model.into();
        let (summary, per_parameter) = accuracy(&trials)?;
        let aborted = trials
            .iter()
            .filter(|t| t.aborted.is_some())
            .map(|t| (t.agent_type.to_string(), t.difficulty.to_string(), t.trial))
            .collect();
        Ok(Self {
            accuracy: accuracy_table(&model, &summary),
            model,
            config,
            summary,
            per_parameter,
            precision,
            aborted,
            trials,
        })
    }

    /// Writes [`REPORT_FILES`] into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<(), EvalError> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        fs::write(dir.join("report.json"), json)?;
        fs::write(dir.join("accuracy.csv"), self.accuracy_csv()?)?;
        fs::write(dir.join("summary.csv"), self.summary_csv()?)?;
        fs::write(dir.join("per_parameter.csv"), self.per_parameter_csv()?)?;
        fs::write(dir.join("boxplot.csv"), self.boxplot_csv()?)?;
        fs::write(dir.join("precision.csv"), self.precision_csv()?)?;
        Ok(())
    }

    pub fn accuracy_csv(&self) -> Result<Vec<u8>, EvalError> {
        table(
            &["model", "agent_type", "easy", "medium", "hard"],
            self.accuracy.iter().map(|r| {
                vec![
                    r.model.clone(),
                    r.agent_type.to_string(),
                    opt(r.easy),
                    opt(r.medium),
                    opt(r.hard),
                ]
            }),
        )
    }

    pub fn summary_csv(&self) -> Result<Vec<u8>, EvalError> {
        table(
            &[
                "agent_type",
                "difficulty",
                "trials",
                "aborted",
                "accuracy",
                "mean_questions",
                "mean_iterations",
                "mean_generations",
                "mean_duration",
            ],
            self.summary.iter().map(|r| {
                vec![
                    r.agent_type.to_string(),
                    r.difficulty.to_string(),
                    r.trials.to_string(),
                    r.aborted.to_string(),
                    r.accuracy.to_string(),
                    r.mean_questions.to_string(),
                    r.mean_iterations.to_string(),
                    r.mean_generations.to_string(),
                    r.mean_duration.to_string(),
                ]
            }),
        )
    }

    pub fn per_parameter_csv(&self) -> Result<Vec<u8>, EvalError> {
        table(
            &["agent_type", "difficulty", "parameter", "rate"],
            self.per_parameter.iter().map(|r| {
                vec![
                    r.agent_type.to_string(),
                    r.difficulty.to_string(),
                    r.parameter.to_string(),
                    r.rate.to_string(),
                ]
            }),
        )
    }

    /// One row per trial: the raw distributions behind the box plots.
    pub fn boxplot_csv(&self) -> Result<Vec<u8>, EvalError> {
        table(
            &[
                "agent_type",
                "difficulty",
                "trial",
                "success",
                "questions",
                "iterations",
                "generations",
                "duration",
            ],
            self.trials.iter().map(|t| {
                vec![
                    t.agent_type.to_string(),
                    t.difficulty.to_string(),
                    t.trial.to_string(),
                    u8::from(t.success).to_string(),
                    t.questions.to_string(),
                    t.iterations.to_string(),
                    t.generations.to_string(),
                    t.duration_s.to_string(),
                ]
            }),
        )
    }

    pub fn precision_csv(&self) -> Result<Vec<u8>, EvalError> {
        table(
            &["parameter", "easy", "medium", "hard"],
            self.precision.iter().map(|r| {
                vec![
                    r.parameter.to_string(),
                    opt(r.easy),
                    opt(r.medium),
                    opt(r.hard),
                ]
            }),
        )
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn table(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>, EvalError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| EvalError::Io(e.into_error()))
}

const DURATION_KEYS: [&str; 3] = ["duration_s", "mean_duration", "duration"];

/// Zeroes every wall-clock field of a report JSON value, so two runs can be
/// compared byte for byte.
pub fn strip_durations(value: &mut Value) {
    match value {
        Value::Object(map) => {
            for (k, v) in map.iter_mut() {
                if DURATION_KEYS.contains(&k.as_str()) {
                    *v = Value::from(0.0);
                } else {
                    strip_durations(v);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(strip_durations),
        _ => {}
    }
}

/// Drops wall-clock columns from CSV text.
pub fn strip_duration_columns(csv_text: &[u8]) -> Result<Vec<u8>, EvalError> {
    let mut r = csv::Reader::from_reader(csv_text);
    let header = r.headers()?.clone();
    let keep: Vec<usize> = (0..header.len())
        .filter(|&i| !DURATION_KEYS.contains(&&header[i]))
        .collect();
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(keep.iter().map(|&i| &header[i]))?;
    for rec in r.records() {
        let rec = rec?;
        out.write_record(keep.iter().map(|&i| &rec[i]))?;
    }
    out.flush()?;
    let mut bytes = out
        .into_inner()
        .map_err(|e| EvalError::Io(e.into_error()))?;
    bytes.flush()?;
    Ok(bytes)
}
