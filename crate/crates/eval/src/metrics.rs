use std::collections::BTreeMap;

use hems_agent::{AgentType, ParameterId};
use hems_simuser::DifficultyMode;
use serde::Serialize;

use crate::error::EvalError;
use crate::grid::TrialResult;

/// One (agent type, difficulty) cell. Aborted trials are counted apart and
/// left out of every mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub agent_type: AgentType,
    pub difficulty: DifficultyMode,
    pub trials: usize,
    pub aborted: usize,
    /// Percentage of trials with all eight parameters right.
    pub accuracy: f64,
    pub mean_questions: f64,
    pub mean_iterations: f64,
    pub mean_generations: f64,
    pub mean_duration: f64,
}

/// Retrieval rate of one parameter in one cell, in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterRow {
    pub agent_type: AgentType,
    pub difficulty: DifficultyMode,
    pub parameter: ParameterId,
    pub rate: f64,
}

/// Accuracy of one agent type across difficulties; `None` for a difficulty
/// that was not run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub model: String,
    pub agent_type: AgentType,
    pub easy: Option<f64>,
    pub medium: Option<f64>,
    pub hard: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Aggregates trial results. The output does not depend on the order of
/// `results`.
pub fn accuracy(
    results: &[TrialResult],
) -> Result<(Vec<SummaryRow>, Vec<ParameterRow>), EvalError> {
    if results.is_empty() {
        return Err(EvalError::NoResults);
    }
    let mut cells: BTreeMap<(AgentType, DifficultyMode), Vec<&TrialResult>> = BTreeMap::new();
    for r in results {
        cells
            .entry((r.agent_type, r.difficulty))
            .or_default()
            .push(r);
    }
    let mut summary = Vec::new();
    let mut per_parameter = Vec::new();
    for ((agent_type, difficulty), trials) in cells {
        let done: Vec<_> = trials.iter().filter(|t| t.aborted.is_none()).collect();
        let pct = |hits: usize| {
            if done.is_empty() {
                0.0
            } else {
                100.0 * hits as f64 / done.len() as f64
            }
        };
        summary.push(SummaryRow {
            agent_type,
            difficulty,
            trials: trials.len(),
            aborted: trials.len() - done.len(),
            accuracy: pct(done.iter().filter(|t| t.success).count()),
            mean_questions: mean(done.iter().map(|t| f64::from(t.questions))),
            mean_iterations: mean(done.iter().map(|t| f64::from(t.iterations))),
            mean_generations: mean(done.iter().map(|t| f64::from(t.generations))),
            mean_duration: mean(done.iter().map(|t| t.duration_s)),
        });
        for p in ParameterId::ALL {
            let hits = done
                .iter()
                .filter(|t| t.parameters.iter().any(|r| r.parameter == p && r.correct))
                .count();
            per_parameter.push(ParameterRow {
                agent_type,
                difficulty,
                parameter: p,
                rate: pct(hits),
            });
        }
    }
    Ok((summary, per_parameter))
}

/// Pivots the summary into one row per agent type with a column per
/// difficulty.
pub fn accuracy_table(model: &str, summary: &[SummaryRow]) -> Vec<AccuracyRow> {
    let mut rows: BTreeMap<AgentType, AccuracyRow> = BTreeMap::new();
    for s in summary {
        let row = rows.entry(s.agent_type).or_insert_with(|| AccuracyRow {
            model: model.to_owned(),
            agent_type: s.agent_type,
            easy: None,
            medium: None,
            hard: None,
        });
        let slot = match s.difficulty {
            DifficultyMode::Easy => &mut row.easy,
            DifficultyMode::Medium => &mut row.medium,
            DifficultyMode::Hard => &mut row.hard,
        };
        *slot = Some(s.accuracy);
    }
    rows.into_values().collect()
}
