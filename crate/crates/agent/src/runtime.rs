//! The per-task agent loop and the task-list driver around it.
//!
//! Both are explicit state machines so a caller can suspend at `ask_user`
//! and resume later with the answer: [`run_task`] and [`run_retrieval`]
//! drive them to completion against a [`UserChannel`], while the HTTP
//! service keeps a [`RetrievalDriver`] per session.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;
use std::time::Instant;

use hems_core::{HemsError, HemsParameters};
use hems_gateway::{GenerationRequest, TextGenerator};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::{parse_response, ParsedStep};
use crate::prompts::{render_agent_prompt, AgentType, PromptError};
use crate::tasks::{
    assemble_parameters, store_validate, ParamValue, ParameterId, ParameterTask, StoreOutcome,
};
use crate::tools::{Toolkit, ASK_USER, STORE};

pub const STOP_SEQUENCES: [&str; 1] = ["Observation:"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub agent_type: AgentType,
    /// Maximum generations per task attempt.
    pub n_iter: u32,
    pub max_tokens: u32,
    /// Passed to the generation backend untouched.
    pub options: serde_json::Map<String, serde_json::Value>,
    /// Consecutive parse errors tolerated before an attempt is abandoned.
    /// `None` leaves only the `n_iter` cap.
    pub parse_error_budget: Option<u32>,
    /// Re-instantiations of a failed task before it is given up.
    pub retry_budget: u32,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            agent_type: AgentType::ReactWithExample,
            n_iter: 8,
            max_tokens: 256,
            options: serde_json::Map::new(),
            parse_error_budget: None,
            retry_budget: 3,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.n_iter == 0 {
            return Err(RuntimeError::Config("n_iter must be at least 1".into()));
        }
        if self.max_tokens == 0 {
            return Err(RuntimeError::Config("max_tokens must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid agent configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("no question is pending")]
    NoPendingQuestion,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("user channel failed: {0}")]
pub struct UserError(pub String);

/// Answers the agent's `ask_user` calls.
pub trait UserChannel {
    fn ask(&mut self, question: &str) -> Result<String, UserError>;
}

impl<F: FnMut(&str) -> Result<String, UserError>> UserChannel for F {
    fn ask(&mut self, question: &str) -> Result<String, UserError> {
        self(question)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    MaxIterations,
    ParseFailureExhausted,
    ProviderError,
    /// The user channel failed to produce an answer.
    UserUnavailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Generation,
    Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub question: String,
    pub answer: String,
}

/// Everything that happened in one attempt at one task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalTrace {
    pub parameter: ParameterId,
    pub agent_type: AgentType,
    /// 1 for the first instantiation of this task, 2 after one retry, ...
    pub attempt: u32,
    pub transcript: Vec<Segment>,
    /// Generations consumed, at most `n_iter`.
    pub generations: u32,
    pub questions_asked: u32,
    pub exchanges: Vec<Exchange>,
    pub stored_value: Option<ParamValue>,
    pub outcome: Outcome,
    pub parse_errors: u32,
    /// Tool calls accepted only through a lenient parse path.
    pub lenient_parses: u32,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

/// Writes one JSON object per line.
pub fn write_traces_jsonl<W: Write>(traces: &[RetrievalTrace], mut w: W) -> std::io::Result<()> {
    for t in traces {
        serde_json::to_writer(&mut w, t)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskStep {
    Question(String),
    Finished,
}

/// One agent instance working on one task.
#[derive(Debug)]
pub struct TaskRun {
    task: ParameterTask,
    toolkit: Toolkit,
    config: AgentConfig,
    prompt: String,
    trace: RetrievalTrace,
    pending: Option<String>,
    consecutive_parse_errors: u32,
    finished: bool,
    started: Instant,
}

impl TaskRun {
    pub fn new(
        task: ParameterTask,
        toolkit: Toolkit,
        config: AgentConfig,
        attempt: u32,
    ) -> Result<Self, RuntimeError> {
        config.validate()?;
        let prompt = render_agent_prompt(config.agent_type, &toolkit, &task)?;
        let trace = RetrievalTrace {
            parameter: task.parameter,
            agent_type: config.agent_type,
            attempt,
            transcript: Vec::new(),
            generations: 0,
            questions_asked: 0,
            exchanges: Vec::new(),
            stored_value: None,
            outcome: Outcome::MaxIterations,
            parse_errors: 0,
            lenient_parses: 0,
            error: None,
            wall_time_s: 0.0,
        };
        Ok(Self {
            task,
            toolkit,
            config,
            prompt,
            trace,
            pending: None,
            consecutive_parse_errors: 0,
            finished: false,
            started: Instant::now(),
        })
    }

    pub fn task(&self) -> &ParameterTask {
        &self.task
    }

    /// The full agent prompt so far; only ever grows.
    pub fn prompt(&self) -> &str {
        &self.prompt
    }

    pub fn pending_question(&self) -> Option<&str> {
        self.pending.as_deref()
    }

    pub fn trace(&self) -> &RetrievalTrace {
        &self.trace
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn push(&mut self, kind: SegmentKind, text: String) {
        self.prompt.push_str(&text);
        self.trace.transcript.push(Segment { kind, text });
    }

    fn observe(&mut self, text: &str) {
        let line = text.replace(['\r', '\n'], " ");
        self.push(
            SegmentKind::Observation,
            format!("Observation: {}\n", line.trim()),
        );
    }

    fn finish(&mut self, outcome: Outcome, error: Option<String>) {
        self.trace.outcome = outcome;
        self.trace.error = error;
        self.trace.wall_time_s = self.started.elapsed().as_secs_f64();
        self.finished = true;
    }

    /// Generates until the agent asks a question or the attempt ends.
    /// Calling it again while a question is pending returns that question.
    pub fn advance(&mut self, generator: &dyn TextGenerator) -> TaskStep {
        if self.finished {
            return TaskStep::Finished;
        }
        if let Some(q) = &self.pending {
            return TaskStep::Question(q.clone());
        }
        while self.trace.generations < self.config.n_iter {
            self.trace.generations += 1;
            let request = GenerationRequest::new(
                self.prompt.clone(),
                STOP_SEQUENCES.iter().map(|s| s.to_string()).collect(),
                self.config.max_tokens,
            )
            .map(|r| r.with_options(self.config.options.clone()));
            let response = match request.and_then(|r| generator.generate(&r)) {
                Ok(text) => text,
                Err(e) => {
                    self.finish(Outcome::ProviderError, Some(e.to_string()));
                    return TaskStep::Finished;
                }
            };
            let step = parse_response(&response, &self.toolkit);
            let mut text = response;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            self.push(SegmentKind::Generation, text);

            match step {
                ParsedStep::ToolCall { call, leniency } => {
                    self.consecutive_parse_errors = 0;
                    if leniency.any() {
                        self.trace.lenient_parses += 1;
                    }
                    if call.action == ASK_USER {
                        let question = call.action_input.render();
                        self.trace.questions_asked += 1;
                        self.pending = Some(question.clone());
                        return TaskStep::Question(question);
                    }
                    debug_assert_eq!(call.action, STORE);
                    let outcome = store_validate(&self.task, &call.action_input);
                    self.observe(&outcome.observation(self.task.format));
                    if let StoreOutcome::Stored(value) = outcome {
                        self.trace.stored_value = Some(value);
                        self.finish(Outcome::Success, None);
                        return TaskStep::Finished;
                    }
                }
                ParsedStep::FinalAnswer { .. } => {}
                ParsedStep::ParseError { error, observation } => {
                    self.trace.parse_errors += 1;
                    self.consecutive_parse_errors += 1;
                    self.observe(&observation);
                    if self
                        .config
                        .parse_error_budget
                        .is_some_and(|b| self.consecutive_parse_errors > b)
                    {
                        self.finish(Outcome::ParseFailureExhausted, Some(error));
                        return TaskStep::Finished;
                    }
                }
            }
        }
        self.finish(Outcome::MaxIterations, None);
        TaskStep::Finished
    }

    /// Supplies the answer to the pending question.
    pub fn answer(&mut self, answer: &str) -> Result<(), RuntimeError> {
        let question = self.pending.take().ok_or(RuntimeError::NoPendingQuestion)?;
        self.trace.exchanges.push(Exchange {
            question,
            answer: answer.to_owned(),
        });
        self.observe(answer);
        Ok(())
    }

    /// Ends the attempt because the answer could not be obtained.
    pub fn abort(&mut self, reason: impl Into<String>) {
        self.pending = None;
        self.finish(Outcome::UserUnavailable, Some(reason.into()));
    }

    pub fn into_trace(self) -> RetrievalTrace {
        self.trace
    }
}

/// Runs one task to completion.
pub fn run_task(
    generator: &dyn TextGenerator,
    user: &mut dyn UserChannel,
    task: &ParameterTask,
    toolkit: &Toolkit,
    config: &AgentConfig,
) -> Result<RetrievalTrace, RuntimeError> {
    let mut run = TaskRun::new(task.clone(), toolkit.clone(), config.clone(), 1)?;
    drive_task(&mut run, generator, user);
    Ok(run.into_trace())
}

fn drive_task(run: &mut TaskRun, generator: &dyn TextGenerator, user: &mut dyn UserChannel) {
    while let TaskStep::Question(q) = run.advance(generator) {
        match user.ask(&q) {
            Ok(a) => run.answer(&a).expect("question is pending"),
            Err(e) => run.abort(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum DriverEvent {
    QuestionAsked {
        parameter: ParameterId,
        question: String,
    },
    AnswerReceived {
        parameter: ParameterId,
        answer: String,
    },
    ParameterStored {
        parameter: ParameterId,
        value: ParamValue,
    },
    TaskFailed {
        parameter: ParameterId,
        attempt: u32,
        outcome: Outcome,
    },
    TaskAbandoned {
        parameter: ParameterId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DriverStep {
    Question {
        parameter: ParameterId,
        text: String,
    },
    Finished,
}

/// Works through a task list, keeping a failed task at the head until it is
/// stored or its retry budget is spent.
#[derive(Debug)]
pub struct RetrievalDriver {
    queue: VecDeque<ParameterTask>,
    toolkit: Toolkit,
    config: AgentConfig,
    current: Option<TaskRun>,
    failures_on_head: u32,
    traces: Vec<RetrievalTrace>,
    stored: BTreeMap<ParameterId, ParamValue>,
    unrecovered: Vec<ParameterId>,
    events: Vec<DriverEvent>,
}

impl RetrievalDriver {
    pub fn new(
        tasks: Vec<ParameterTask>,
        toolkit: Toolkit,
        config: AgentConfig,
    ) -> Result<Self, RuntimeError> {
        config.validate()?;
        Ok(Self {
            queue: tasks.into(),
            toolkit,
            config,
            current: None,
            failures_on_head: 0,
            traces: Vec::new(),
            stored: BTreeMap::new(),
            unrecovered: Vec::new(),
            events: Vec::new(),
        })
    }

    /// Runs until a question needs answering or every task is settled.
    pub fn advance(&mut self, generator: &dyn TextGenerator) -> Result<DriverStep, RuntimeError> {
        loop {
            if self.current.is_none() {
                let Some(task) = self.queue.front() else {
                    return Ok(DriverStep::Finished);
                };
                self.current = Some(TaskRun::new(
                    task.clone(),
                    self.toolkit.clone(),
                    self.config.clone(),
                    self.failures_on_head + 1,
                )?);
            }
            let run = self.current.as_mut().expect("set above");
            let already_pending = run.pending_question().is_some();
            match run.advance(generator) {
                TaskStep::Question(text) => {
                    let parameter = run.task().parameter;
                    if !already_pending {
                        self.events.push(DriverEvent::QuestionAsked {
                            parameter,
                            question: text.clone(),
                        });
                    }
                    return Ok(DriverStep::Question { parameter, text });
                }
                TaskStep::Finished => self.settle_current(),
            }
        }
    }

    fn settle_current(&mut self) {
        let trace = self.current.take().expect("a task is running").into_trace();
        let parameter = trace.parameter;
        match (&trace.outcome, &trace.stored_value) {
            (Outcome::Success, Some(value)) => {
                self.stored.insert(parameter, value.clone());
                self.events.push(DriverEvent::ParameterStored {
                    parameter,
                    value: value.clone(),
                });
                self.queue.pop_front();
                self.failures_on_head = 0;
            }
            _ => {
                self.failures_on_head += 1;
                self.events.push(DriverEvent::TaskFailed {
                    parameter,
                    attempt: trace.attempt,
                    outcome: trace.outcome,
                });
                if self.failures_on_head > self.config.retry_budget {
                    self.unrecovered.push(parameter);
                    self.events.push(DriverEvent::TaskAbandoned { parameter });
                    self.queue.pop_front();
                    self.failures_on_head = 0;
                }
            }
        }
        self.traces.push(trace);
    }

    pub fn answer(&mut self, answer: &str) -> Result<(), RuntimeError> {
        let run = self
            .current
            .as_mut()
            .ok_or(RuntimeError::NoPendingQuestion)?;
        let parameter = run.task().parameter;
        run.answer(answer)?;
        self.events.push(DriverEvent::AnswerReceived {
            parameter,
            answer: answer.to_owned(),
        });
        Ok(())
    }

    /// Ends the running attempt when its question cannot be answered.
    pub fn abort_current(&mut self, reason: impl Into<String>) {
        if let Some(run) = self.current.as_mut() {
            run.abort(reason);
            self.settle_current();
        }
    }

    pub fn pending_question(&self) -> Option<(ParameterId, &str)> {
        let run = self.current.as_ref()?;
        Some((run.task().parameter, run.pending_question()?))
    }

    pub fn current_parameter(&self) -> Option<ParameterId> {
        self.queue.front().map(|t| t.parameter)
    }

    pub fn take_events(&mut self) -> Vec<DriverEvent> {
        std::mem::take(&mut self.events)
    }

    pub fn stored(&self) -> &BTreeMap<ParameterId, ParamValue> {
        &self.stored
    }

    pub fn traces(&self) -> &[RetrievalTrace] {
        &self.traces
    }

    /// Parameters given up after their retry budget ran out.
    pub fn unrecovered(&self) -> &[ParameterId] {
        &self.unrecovered
    }

    pub fn is_finished(&self) -> bool {
        self.current.is_none() && self.queue.is_empty()
    }

    pub fn into_report(self) -> RetrievalReport {
        RetrievalReport {
            traces: self.traces,
            stored: self.stored,
            unrecovered: self.unrecovered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetrievalReport {
    pub traces: Vec<RetrievalTrace>,
    pub stored: BTreeMap<ParameterId, ParamValue>,
    pub unrecovered: Vec<ParameterId>,
}

impl RetrievalReport {
    pub fn questions(&self) -> u32 {
        self.traces.iter().map(|t| t.questions_asked).sum()
    }

    pub fn parameters(&self) -> Result<HemsParameters, RetrievalError> {
        if !self.unrecovered.is_empty() {
            return Err(RetrievalError::Exhausted {
                unrecovered: self.unrecovered.clone(),
            });
        }
        assemble_parameters(&self.stored).map_err(RetrievalError::Invalid)
    }
}

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("retry budget exhausted for: {}", list(.unrecovered))]
    Exhausted { unrecovered: Vec<ParameterId> },
    #[error("retrieved parameters are inconsistent: {0}")]
    Invalid(HemsError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

fn list(ids: &[ParameterId]) -> String {
    ids.iter()
        .map(|p| p.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug)]
pub struct Retrieval {
    pub report: RetrievalReport,
    pub parameters: HemsParameters,
}

/// Failed retrieval with whatever was collected.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct RetrievalFailure {
    pub error: RetrievalError,
    pub report: Option<RetrievalReport>,
}

/// Retrieves every task's parameter and assembles the optimizer inputs.
pub fn run_retrieval(
    tasks: Vec<ParameterTask>,
    generator: &dyn TextGenerator,
    user: &mut dyn UserChannel,
    toolkit: &Toolkit,
    config: &AgentConfig,
) -> Result<Retrieval, RetrievalFailure> {
    let fail = |error: RetrievalError, report| RetrievalFailure { error, report };
    let mut driver = RetrievalDriver::new(tasks, toolkit.clone(), config.clone())
        .map_err(|e| fail(e.into(), None))?;
    loop {
        match driver.advance(generator) {
            Ok(DriverStep::Finished) => break,
            Ok(DriverStep::Question { text, .. }) => match user.ask(&text) {
                Ok(a) => driver.answer(&a).expect("question is pending"),
                Err(e) => driver.abort_current(e.to_string()),
            },
            Err(e) => return Err(fail(e.into(), Some(driver.into_report()))),
        }
    }
    let report = driver.into_report();
    match report.parameters() {
        Ok(parameters) => Ok(Retrieval { report, parameters }),
        Err(error) => Err(fail(error, Some(report))),
    }
}
