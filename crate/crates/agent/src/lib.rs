//! Dialogue-driven retrieval of the eight household parameters.
//!
//! An agent renders its prompt from the assets in `assets/`, generates
//! through a [`hems_gateway::TextGenerator`], and acts with two tools:
//! `ask_user` (pose a question) and `store` (validate and keep a value).
//! [`runtime`] holds the per-task loop and the task-list driver, [`parser`]
//! turns each generation into a tool call, and [`policy`] is a rule-based
//! generator for offline runs.

pub mod extract;
pub mod parser;
pub mod policy;
pub mod prompts;
pub mod runtime;
pub mod tasks;
pub mod tools;

pub use parser::{parse_response, parse_transcript, ActionInput, Leniency, ParsedStep, ToolCall};
pub use policy::{question_for, PolicyGenerator};
pub use prompts::{render_agent_prompt, render_error, AgentType, PromptError, Template};
pub use runtime::{
    run_retrieval, run_task, write_traces_jsonl, AgentConfig, DriverEvent, DriverStep, Exchange,
    Outcome, Retrieval, RetrievalDriver, RetrievalError, RetrievalFailure, RetrievalReport,
    RetrievalTrace, RuntimeError, Segment, SegmentKind, TaskRun, TaskStep, UserChannel, UserError,
    STOP_SEQUENCES,
};
pub use tasks::{
    assemble_parameters, standard_tasks, store_validate, ExpectedFormat, ParamValue, ParameterId,
    ParameterTask, StoreOutcome, STORE_SUCCESS,
};
pub use tools::{Toolkit, ASK_USER, STORE};
