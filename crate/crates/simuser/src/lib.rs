//! Simulated users for the parameter dialogue.
//!
//! A [`PersonaGroundTruth`] holds the eight values a user knows. The
//! [`DifficultyMode`] decides how those values are written: canonical in
//! easy mode, off-format in medium mode, verbose and mixed with unrelated
//! facts in hard mode. [`ScriptedUser`] answers from canned sentences;
//! [`LlmUser`] renders the persona prompt and asks a text generator.

mod llm;
mod mode;
mod persona;
mod scripted;

pub use llm::{render_user_query, LlmUser, USER_STOP};
pub use mode::{DifficultyMode, ParseModeError};
pub use persona::{randomize_truth, PersonaGroundTruth, CITIES};
pub use scripted::{
    match_question, perfect_answer, scripted_answer, ScriptedUser, UNMATCHED_ANSWER,
};

use hems_agent::prompts::{USER_PROMPT_EASY, USER_PROMPT_HARD, USER_PROMPT_MEDIUM};
use hems_agent::{ParameterId, PromptError};

/// The persona's system prompt for `mode`.
pub fn render_user_prompt(
    mode: DifficultyMode,
    truth: &PersonaGroundTruth,
) -> Result<String, PromptError> {
    let template = match mode {
        DifficultyMode::Easy => USER_PROMPT_EASY,
        DifficultyMode::Medium => USER_PROMPT_MEDIUM,
        DifficultyMode::Hard => USER_PROMPT_HARD,
    };
    let v = |p| truth.placeholder_value(mode, p);
    let bindings = [
        ("CITY", v(ParameterId::City)),
        ("EV", v(ParameterId::Ev)),
        ("TMIN", v(ParameterId::TMin)),
        ("TMAX", v(ParameterId::TMax)),
        ("ARRIVAL_TIME", v(ParameterId::EvArrivalTime)),
        ("LEAVING_TIME", v(ParameterId::EvDepartureTime)),
        ("DATE1", v(ParameterId::DateStart)),
        ("DATE2", v(ParameterId::DateEnd)),
    ];
    let refs: Vec<(&str, &str)> = bindings.iter().map(|(k, v)| (*k, v.as_str())).collect();
    template.render(&refs)
}
