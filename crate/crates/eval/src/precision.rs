//! How close user answers are to the ideal answer, by embedding similarity.

use std::collections::BTreeMap;

use hems_agent::{question_for, ParameterId, UserChannel};
use hems_gateway::{cosine, Embedder};
use hems_simuser::{perfect_answer, randomize_truth, DifficultyMode, LlmUser, ScriptedUser};
use serde::Serialize;

use crate::error::EvalError;
use crate::grid::UserProvider;

/// Cosine similarity between the embeddings of `question answer` and
/// `question perfect_answer`.
pub fn cosine_precision(
    question: &str,
    answer: &str,
    perfect_answer: &str,
    embedder: &dyn Embedder,
) -> Result<f64, EvalError> {
    if [question, answer, perfect_answer]
        .iter()
        .any(|t| t.trim().is_empty())
    {
        return Err(EvalError::EmptyText);
    }
    let a = embedder.embed(&format!("{question} {answer}"))?;
    let b = embedder.embed(&format!("{question} {perfect_answer}"))?;
    cosine(&a, &b).ok_or(EvalError::UndefinedScore)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionSample {
    pub parameter: ParameterId,
    pub difficulty: DifficultyMode,
    pub trial: u32,
    pub question: String,
    pub answer: String,
    pub perfect_answer: String,
    pub score: f64,
}

/// Asks each parameter's question once per trial and difficulty. Trial `i`
/// uses the persona drawn from `seed + i`.
pub fn precision_corpus(
    user: &UserProvider,
    difficulties: &[DifficultyMode],
    trials: u32,
    seed: u64,
    embedder: &dyn Embedder,
) -> Result<Vec<PrecisionSample>, EvalError> {
    let mut samples = Vec::new();
    for trial in 0..trials {
        let truth = randomize_truth(seed.wrapping_add(u64::from(trial)));
        for &difficulty in difficulties {
            let mut channel: Box<dyn UserChannel> = match user {
                UserProvider::Scripted => Box::new(ScriptedUser::new(difficulty, truth.clone())),
                UserProvider::Llm(g) => {
                    Box::new(LlmUser::new(difficulty, truth.clone(), g.clone()))
                }
            };
            for p in ParameterId::ALL {
                let question = question_for(p);
                let answer = match channel.ask(question) {
                    Ok(a) => a,
                    // an unanswered question is skipped, not scored as zero
                    Err(_) => continue,
                };
                let perfect = perfect_answer(&truth, p);
                let score = cosine_precision(question, &answer, &perfect, embedder)?;
                samples.push(PrecisionSample {
                    parameter: p,
                    difficulty,
                    trial,
                    question: question.to_owned(),
                    answer,
                    perfect_answer: perfect,
                    score,
                });
            }
        }
    }
    Ok(samples)
}

/// Mean score per parameter and difficulty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionRow {
    pub parameter: ParameterId,
    pub easy: Option<f64>,
    pub medium: Option<f64>,
    pub hard: Option<f64>,
}

impl PrecisionRow {
    pub fn get(&self, mode: DifficultyMode) -> Option<f64> {
        match mode {
            DifficultyMode::Easy => self.easy,
            DifficultyMode::Medium => self.medium,
            DifficultyMode::Hard => self.hard,
        }
    }
}

pub fn precision_table(samples: &[PrecisionSample]) -> Vec<PrecisionRow> {
    let mut sums: BTreeMap<(ParameterId, DifficultyMode), (f64, usize)> = BTreeMap::new();
    for s in samples {
        let e = sums.entry((s.parameter, s.difficulty)).or_default();
        e.0 += s.score;
        e.1 += 1;
    }
    let cell = |p, m| sums.get(&(p, m)).map(|(s, n)| s / *n as f64);
    ParameterId::ALL
        .iter()
        .filter(|&&p| {
            DifficultyMode::ALL
                .iter()
                .any(|&m| sums.contains_key(&(p, m)))
        })
        .map(|&p| PrecisionRow {
            parameter: p,
            easy: cell(p, DifficultyMode::Easy),
            medium: cell(p, DifficultyMode::Medium),
            hard: cell(p, DifficultyMode::Hard),
        })
        .collect()
}
