use std::sync::Arc;
use std::time::Instant;

use hems_agent::{
    run_retrieval, standard_tasks, AgentConfig, AgentType, Outcome, ParameterId, RetrievalReport,
    Toolkit, UserChannel,
};
use hems_gateway::TextGenerator;
use hems_simuser::{randomize_truth, DifficultyMode, LlmUser, PersonaGroundTruth, ScriptedUser};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compare::values_match;
use crate::error::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub agent_types: Vec<AgentType>,
    pub difficulties: Vec<DifficultyMode>,
    /// Trials per (agent type, difficulty) cell.
    pub trials: u32,
    /// Trial `i` uses the persona drawn from `seed + i`.
    pub seed: u64,
    /// Compare raw strings instead of canonical values.
    pub strict: bool,
    /// Worker threads; `None` lets the pool decide.
    pub workers: Option<usize>,
    /// Settings shared by every agent; the agent type is set per cell.
    pub agent: AgentConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            agent_types: AgentType::ALL.to_vec(),
            difficulties: DifficultyMode::ALL.to_vec(),
            trials: 20,
            seed: 0,
            strict: false,
            workers: None,
            agent: AgentConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.agent_types.is_empty() || self.difficulties.is_empty() {
            return Err(EvalError::Config(
                "at least one agent type and one difficulty are needed".into(),
            ));
        }
        if self.trials == 0 {
            return Err(EvalError::Config("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(EvalError::Config("workers must be at least 1".into()));
        }
        self.agent
            .validate()
            .map_err(|e| EvalError::Config(e.to_string()))
    }
}

#[derive(Clone)]
pub enum UserProvider {
    Scripted,
    Llm(Arc<dyn TextGenerator>),
}

/// Backends for the agent and the user.
#[derive(Clone)]
pub struct Providers {
    pub agent: Arc<dyn TextGenerator>,
    pub user: UserProvider,
}

impl Providers {
    pub fn model_name(&self) -> String {
        self.agent.model_name().to_owned()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterResult {
    pub parameter: ParameterId,
    pub expected: String,
    pub stored: Option<String>,
    pub correct: bool,
    /// Agent instantiations spent on this parameter.
    pub attempts: u32,
    pub generations: u32,
    pub questions: u32,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub agent_type: AgentType,
    pub difficulty: DifficultyMode,
    pub trial: u32,
    pub persona: PersonaGroundTruth,
    pub parameters: Vec<ParameterResult>,
    /// Every parameter stored and equal to the ground truth.
    pub success: bool,
    pub questions: u32,
    /// Agent instantiations over the whole trial; 8 when no task is retried.
    pub iterations: u32,
    pub generations: u32,
    pub duration_s: f64,
    /// Set when a provider failed during the trial.
    pub aborted: Option<String>,
}

fn score(
    agent_type: AgentType,
    difficulty: DifficultyMode,
    trial: u32,
    persona: PersonaGroundTruth,
    report: &RetrievalReport,
    strict: bool,
) -> TrialResult {
    let parameters: Vec<ParameterResult> = ParameterId::ALL
        .iter()
        .map(|&p| {
            let traces: Vec<_> = report.traces.iter().filter(|t| t.parameter == p).collect();
            let expected = persona.expected(p).canonical();
            let stored = report.stored.get(&p).map(|v| v.canonical());
            let correct = stored
                .as_deref()
                .is_some_and(|s| values_match(p.format(), &expected, s, strict));
            ParameterResult {
                parameter: p,
                expected,
                stored,
                correct,
                attempts: traces.len() as u32,
                generations: traces.iter().map(|t| t.generations).sum(),
                questions: traces.iter().map(|t| t.questions_asked).sum(),
                outcome: traces.last().map(|t| t.outcome),
            }
        })
        .collect();
    let aborted = report
        .traces
        .iter()
        .find(|t| matches!(t.outcome, Outcome::ProviderError | Outcome::UserUnavailable))
        .map(|t| t.error.clone().unwrap_or_else(|| "provider error".into()));
    TrialResult {
        agent_type,
        difficulty,
        trial,
        persona,
        success: parameters.iter().all(|p| p.correct),
        questions: parameters.iter().map(|p| p.questions).sum(),
        iterations: parameters.iter().map(|p| p.attempts).sum(),
        generations: parameters.iter().map(|p| p.generations).sum(),
        parameters,
        duration_s: 0.0,
        aborted,
    }
}

fn run_trial(
    providers: &Providers,
    config: &GridConfig,
    agent_type: AgentType,
    difficulty: DifficultyMode,
    trial: u32,
) -> TrialResult {
    let persona = randomize_truth(config.seed.wrapping_add(u64::from(trial)));
    let mut user: Box<dyn UserChannel> = match &providers.user {
        UserProvider::Scripted => Box::new(ScriptedUser::new(difficulty, persona.clone())),
        UserProvider::Llm(g) => Box::new(LlmUser::new(difficulty, persona.clone(), g.clone())),
    };
    let agent = AgentConfig {
        agent_type,
        ..config.agent.clone()
    };
    let started = Instant::now();
    let report = match run_retrieval(
        standard_tasks(),
        providers.agent.as_ref(),
        user.as_mut(),
        &Toolkit::standard(),
        &agent,
    ) {
        Ok(r) => r.report,
        Err(failure) => failure.report.unwrap_or(RetrievalReport {
            traces: Vec::new(),
            stored: Default::default(),
            unrecovered: ParameterId::ALL.to_vec(),
        }),
    };
    let mut result = score(
        agent_type,
        difficulty,
        trial,
        persona,
        &report,
        config.strict,
    );
    result.duration_s = started.elapsed().as_secs_f64();
    result
}

/// Runs every cell of the grid. Results come back ordered by agent type,
/// then difficulty, then trial, whatever order the workers finish in.
pub fn run_grid(providers: &Providers, config: &GridConfig) -> Result<Vec<TrialResult>, EvalError> {
    config.validate()?;
    let cells: Vec<(AgentType, DifficultyMode, u32)> = config
        .agent_types
        .iter()
        .flat_map(|&a| {
            config
                .difficulties
                .iter()
                .flat_map(move |&d| (0..config.trials).map(move |t| (a, d, t)))
        })
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(a, d, t)| run_trial(providers, config, a, d, t))
            .collect()
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| EvalError::Config(e.to_string()))?;
    Ok(pool.install(work))
}
