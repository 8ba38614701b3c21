//! A rule-based stand-in for the language model on the agent side.
//!
//! [`PolicyGenerator`] reads the rendered agent prompt, works out which
//! parameter the current task asks for and where the episode stands, and
//! emits the next Thought/Action segment in the format the prompt requests.
//! Its output is a pure function of the prompt.

use hems_gateway::{step_index, GatewayError, GenerationRequest, TextGenerator, ASSISTANT_HEADER};
use serde_json::{json, Value};

use crate::extract;
use crate::parser::{parse_response, ParsedStep};
use crate::tasks::{ParameterId, STORE_SUCCESS};
use crate::tools::{Toolkit, ASK_USER, STORE};

const TASK_HEADER: &str = "<|im_start|>agent\n";
const END: &str = "<|im_end|>";

/// The question the rule-based agent asks for each parameter.
pub fn question_for(parameter: ParameterId) -> &'static str {
    match parameter {
        ParameterId::City => "Where do you live ?",
        ParameterId::DateStart => "When do you want the simulation to start ?",
        ParameterId::DateEnd => "When do you want the simulation to end ?",
        ParameterId::Ev => "How many electric vehicles do you own ?",
        ParameterId::EvArrivalTime => "When do you come back from work ?",
        ParameterId::EvDepartureTime => "When do you leave your house ?",
        ParameterId::TMin => "What is your house minimum comfort temperature ?",
        ParameterId::TMax => "What is your house maximum comfort temperature ?",
    }
}

/// Which parameter a task text is about.
pub fn parameter_of_task(task: &str) -> Option<ParameterId> {
    let t = task.to_lowercase();
    let pick = if t.contains("city") || t.contains("where the user lives") {
        ParameterId::City
    } else if t.contains("electric vehicle") {
        ParameterId::Ev
    } else if t.contains("start") && t.contains("date") {
        ParameterId::DateStart
    } else if t.contains("end") && t.contains("date") {
        ParameterId::DateEnd
    } else if t.contains("comes back") || t.contains("arriv") || t.contains("returns") {
        ParameterId::EvArrivalTime
    } else if t.contains("leaves") || t.contains("depart") {
        ParameterId::EvDepartureTime
    } else if t.contains("minimum") {
        ParameterId::TMin
    } else if t.contains("maximum") {
        ParameterId::TMax
    } else {
        return None;
    };
    Some(pick)
}

#[derive(Debug, Clone)]
pub struct PolicyGenerator {
    /// Year assumed for dates spoken without one.
    pub default_year: i32,
    name: String,
}

impl Default for PolicyGenerator {
    fn default() -> Self {
        Self {
            default_year: 2024,
            name: "rule-based".into(),
        }
    }
}

struct Episode<'a> {
    task: &'a str,
    thoughts: bool,
    /// Act agents without an example store dates exactly as spoken at first.
    raw_dates_first: bool,
    /// (tool name if the generation parsed, observation text)
    steps: Vec<(Option<String>, String)>,
}

fn read_episode(prompt: &str) -> Option<Episode<'_>> {
    let head = prompt.rfind(ASSISTANT_HEADER)?;
    let before = &prompt[..head];
    let task_start = before.rfind(TASK_HEADER)? + TASK_HEADER.len();
    let task = before[task_start..].split(END).next()?.trim();
    let thoughts = before.contains("\nThought: You should always think");
    let raw_dates_first = !thoughts && before.matches(ASSISTANT_HEADER).count() == 0;

    let toolkit = Toolkit::standard();
    let mut steps = Vec::new();
    let mut generation = String::new();
    for line in prompt[head + ASSISTANT_HEADER.len()..].split_inclusive('\n') {
        if let Some(obs) = line.strip_prefix("Observation:") {
            let tool = match parse_response(&generation, &toolkit) {
                ParsedStep::ToolCall { call, .. } => Some(call.action),
                _ => None,
            };
            steps.push((tool, obs.trim().to_owned()));
            generation.clear();
        } else {
            generation.push_str(line);
        }
    }
    Some(Episode {
        task,
        thoughts,
        raw_dates_first,
        steps,
    })
}

enum Move {
    Ask(String),
    Store(Value, &'static str),
    Finish(String),
}

impl PolicyGenerator {
    fn value_from(&self, p: ParameterId, answer: &str, raw_date: bool) -> Option<Value> {
        match p {
            ParameterId::City => extract::city(answer).map(Value::from),
            ParameterId::DateStart | ParameterId::DateEnd => {
                let found = extract::dates(answer, self.default_year);
                let m = if p == ParameterId::DateStart {
                    found.first()
                } else {
                    found.last()
                }?;
                Some(if raw_date {
                    m.raw.clone().into()
                } else {
                    m.date.format("%Y/%m/%d").to_string().into()
                })
            }
            ParameterId::Ev => extract::first_count(answer).map(Value::from),
            ParameterId::EvArrivalTime | ParameterId::EvDepartureTime => extract::times(answer)
                .first()
                .map(|t| t.format("%H:%M").to_string().into()),
            ParameterId::TMin | ParameterId::TMax => {
                let nums = extract::numbers(answer);
                let pick = if p == ParameterId::TMin {
                    nums.into_iter().reduce(f64::min)
                } else {
                    nums.into_iter().reduce(f64::max)
                }?;
                Some(if pick.fract() == 0.0 {
                    json!(pick as i64)
                } else {
                    json!(pick)
                })
            }
        }
    }

    fn decide(&self, episode: &Episode<'_>, parameter: ParameterId) -> Move {
        let question = question_for(parameter);
        let Some((tool, observation)) = episode.steps.last() else {
            return Move::Ask(question.to_owned());
        };
        if observation.starts_with(STORE_SUCCESS) {
            return Move::Finish(format!("The {} is stored.", parameter.as_str()));
        }
        let last_answer = episode
            .steps
            .iter()
            .rev()
            .find(|(t, _)| t.as_deref() == Some(ASK_USER))
            .map(|(_, o)| o.as_str());
        let rejected_stores = episode
            .steps
            .iter()
            .rev()
            .take_while(|(t, _)| t.as_deref() == Some(STORE))
            .count();
        match (tool.as_deref(), last_answer) {
            (Some(ASK_USER), Some(answer)) => {
                let raw = episode.raw_dates_first;
                match self.value_from(parameter, answer, raw) {
                    Some(v) => Move::Store(v, "I need to store this parameter."),
                    None => Move::Ask(format!("Sorry, I did not get that. {question}")),
                }
            }
            (Some(STORE), Some(answer)) if rejected_stores == 1 => {
                match self.value_from(parameter, answer, false) {
                    Some(v) => Move::Store(
                        v,
                        "The format was wrong, I need to fix it and store it again.",
                    ),
                    None => Move::Ask(question.to_owned()),
                }
            }
            _ => Move::Ask(question.to_owned()),
        }
    }

    /// Next segment for `prompt`, or `None` when the prompt is not an agent
    /// prompt.
    pub fn respond(&self, prompt: &str) -> Option<String> {
        let episode = read_episode(prompt)?;
        let mut out = String::new();
        if step_index(prompt) == 0 {
            out.push_str(&format!("Task: {}\n", episode.task));
        }
        let Some(parameter) = parameter_of_task(episode.task) else {
            if episode.thoughts {
                out.push_str("Thought: I do not know how to solve this task.\n");
            }
            out.push_str("Final Answer: I cannot solve this task.\n");
            return Some(out);
        };
        let (thought, action, input) = match self.decide(&episode, parameter) {
            Move::Ask(q) => (
                "I need to ask the user for this information.",
                ASK_USER,
                Value::from(q),
            ),
            Move::Store(v, thought) => (thought, STORE, v),
            Move::Finish(answer) => {
                if episode.thoughts {
                    out.push_str("Thought: I now know the final answer.\n");
                }
                out.push_str(&format!("Final Answer: {answer}\n"));
                return Some(out);
            }
        };
        if episode.thoughts {
            out.push_str(&format!("Thought: {thought}\n"));
        }
        let blob = serde_json::to_string_pretty(&json!({"action": action, "action_input": input}))
            .expect("plain JSON");
        out.push_str(&format!("Action:\n```\n{blob}\n```\n"));
        Some(out)
    }
}

impl TextGenerator for PolicyGenerator {
    fn complete(&self, request: &GenerationRequest) -> Result<String, GatewayError> {
        self.respond(&request.prompt)
            .ok_or_else(|| GatewayError::Protocol("prompt has no agent task".into()))
    }

    fn model_name(&self) -> &str {
        &self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompts::{render_agent_prompt, AgentType};
    use crate::tasks::standard_tasks;

    #[test]
    fn every_standard_task_is_recognised() {
        for t in standard_tasks() {
            assert_eq!(parameter_of_task(&t.text), Some(t.parameter), "{}", t.text);
        }
    }

    #[test]
    fn first_move_asks_with_task_line() {
        let task = &standard_tasks()[3];
        let prompt =
            render_agent_prompt(AgentType::ReactWithExample, &Toolkit::standard(), task).unwrap();
        let out = PolicyGenerator::default().respond(&prompt).unwrap();
        assert!(out.starts_with(&format!("Task: {}\nThought: ", task.text)));
        let call = parse_response(&out, &Toolkit::standard());
        let call = call.tool_call().unwrap();
        assert_eq!(call.action, "ask_user");
        assert_eq!(
            call.action_input.render(),
            "How many electric vehicles do you own ?"
        );
    }

    #[test]
    fn act_stores_raw_date_then_fixes_it() {
        let task = &standard_tasks()[1];
        let g = PolicyGenerator::default();
        let mut prompt = render_agent_prompt(AgentType::Act, &Toolkit::standard(), task).unwrap();
        let first = g.respond(&prompt).unwrap();
        assert!(!first.contains("Thought:"));
        prompt.push_str(&first);
        prompt.push_str("Observation: I want the simulation to start on the 16-09-2024.\n");
        let second = g.respond(&prompt).unwrap();
        assert!(
            second.contains("\"action_input\": \"16-09-2024\""),
            "{second}"
        );
        prompt.push_str(&second);
        prompt.push_str("Observation: The value could not be assigned.\n");
        let third = g.respond(&prompt).unwrap();
        assert!(
            third.contains("\"action_input\": \"2024/09/16\""),
            "{third}"
        );
    }
}
