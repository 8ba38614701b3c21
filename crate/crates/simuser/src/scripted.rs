use hems_agent::{ParameterId, UserChannel, UserError};

use crate::mode::DifficultyMode;
use crate::persona::PersonaGroundTruth;

/// Reply to a question the scripted user cannot place.
pub const UNMATCHED_ANSWER: &str = "I don't understand, can you rephrase the question?";

fn has_word(text: &str, word: &str) -> bool {
    text.split(|c: char| !c.is_alphanumeric())
        .any(|w| w == word)
}

/// Which parameter a question is about, by keywords.
pub fn match_question(question: &str) -> Option<ParameterId> {
    let q = question.to_lowercase();
    let any = |words: &[&str]| words.iter().any(|w| q.contains(w));
    let pick = if any(&["minimum", "lowest", "coldest"]) {
        ParameterId::TMin
    } else if any(&["maximum", "highest", "warmest"]) {
        ParameterId::TMax
    } else if any(&["electric vehicle", "electric car"])
        || has_word(&q, "ev")
        || has_word(&q, "evs")
    {
        ParameterId::Ev
    } else if any(&["start", "begin"]) {
        ParameterId::DateStart
    } else if has_word(&q, "end") || any(&["finish", "stop"]) {
        ParameterId::DateEnd
    } else if any(&["come back", "return", "arriv", "get home", "get back"]) {
        ParameterId::EvArrivalTime
    } else if any(&["leave", "depart", "go to work"]) {
        ParameterId::EvDepartureTime
    } else if any(&["live", "city", "town", "located"]) {
        ParameterId::City
    } else {
        return None;
    };
    Some(pick)
}

fn vehicles(n: u32) -> &'static str {
    if n == 1 {
        "electric vehicle"
    } else {
        "electric vehicles"
    }
}

/// The concise, correctly formatted answer precision is measured against.
pub fn perfect_answer(truth: &PersonaGroundTruth, p: ParameterId) -> String {
    scripted_answer(DifficultyMode::Easy, truth, p)
}

/// The canned answer for `p` in `mode`. Every answer contains the value as
/// written in that mode; hard answers add a second sentence and unrelated
/// facts.
pub fn scripted_answer(mode: DifficultyMode, truth: &PersonaGroundTruth, p: ParameterId) -> String {
    use DifficultyMode::*;
    use ParameterId::*;
    let v = truth.surface(mode, p);
    match (mode, p) {
        (Easy, City) => format!("I live in {v}."),
        (Easy, DateStart) => format!("I want the simulation to start on the {v}."),
        (Easy, DateEnd) => format!("I want the simulation to end on the {v}."),
        (Easy, Ev) => format!("I own {v} {}.", vehicles(truth.ev)),
        (Easy, EvArrivalTime) => format!("I come back at {v}."),
        (Easy, EvDepartureTime) => format!("I leave my house at {v}."),
        (Easy, TMin) => format!("My house minimum comfort temperature is {v} degrees celsius."),
        (Easy, TMax) => format!("My house maximum comfort temperature is {v} degrees celsius."),

        (Medium, City) => format!("I live in {v} in England, in a house."),
        (Medium, DateStart) => format!("I want the simulation to start on the {v}."),
        (Medium, DateEnd) => format!("I want the simulation to end on the {v}."),
        (Medium, Ev) => format!("I own {v} volvo XC40."),
        (Medium, EvArrivalTime) => format!("I come back from work at {v} (UK time) after picking up my kids."),
        (Medium, EvDepartureTime) => format!("I leave my house at {v} (UK time) after a good breakfast."),
        (Medium, TMin | TMax) => format!(
            "My house comfort temperature is between {} °C and {} °C.",
            truth.surface(mode, TMin),
            truth.surface(mode, TMax)
        ),

        (Hard, City) => format!("I live in {v} in England on Banbury Road. It is a house I share with my family."),
        (Hard, DateStart | DateEnd) => format!(
            "I want to simulate my electric consumption between {} and {}. I need the whole period to compare my bills.",
            truth.surface(mode, DateStart),
            truth.surface(mode, DateEnd)
        ),
        (Hard, Ev) => format!(
            "I own {v} volvo XC40 and one diesel pickup truck. I also ride a gas-powered motorcycle on weekends."
        ),
        (Hard, EvArrivalTime) => format!("I am back from work at {v} due to traffic. The roads are always busy in the evening."),
        (Hard, EvDepartureTime) => format!("I go to work at {v} to escape traffic. I like to be early at the office."),
        (Hard, TMin | TMax) => format!(
            "I like to set my house thermostat to be between {} and {} degrees Celsius. It keeps my family comfortable.",
            truth.surface(mode, TMin),
            truth.surface(mode, TMax)
        ),
    }
}

/// Deterministic user answering from [`scripted_answer`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedUser {
    pub mode: DifficultyMode,
    pub truth: PersonaGroundTruth,
}

impl ScriptedUser {
    pub fn new(mode: DifficultyMode, truth: PersonaGroundTruth) -> Self {
        Self { mode, truth }
    }

    pub fn answer(&self, question: &str) -> String {
        match match_question(question) {
            Some(p) => scripted_answer(self.mode, &self.truth, p),
            None => UNMATCHED_ANSWER.to_owned(),
        }
    }
}

impl UserChannel for ScriptedUser {
    fn ask(&mut self, question: &str) -> Result<String, UserError> {
        Ok(self.answer(question))
    }
}
