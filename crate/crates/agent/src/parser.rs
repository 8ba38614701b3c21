//! Parsing of one agent generation into a tool call, a final answer or an
//! error observation.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::prompts::render_error;
use crate::tools::Toolkit;

const FENCE: &str = "```";
const OBSERVATION: &str = "Observation:";
const FINAL_ANSWER: &str = "Final Answer:";

/// Tool input: a string, integer, float or list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionInput {
    Int(i64),
    Float(f64),
    Text(String),
    List(Vec<Value>),
}

impl ActionInput {
    /// Plain text for `ask_user` and for messages.
    pub fn render(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Int(i) => i.to_string(),
            Self::Float(f) => f.to_string(),
            Self::List(v) => Value::Array(v.clone()).to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub action: String,
    pub action_input: ActionInput,
}

/// How far the parser had to bend to accept a blob.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leniency {
    /// The blob was not inside a closed markdown fence.
    pub unfenced: bool,
    /// Single quotes were rewritten to double quotes.
    pub healed_quotes: bool,
}

impl Leniency {
    pub fn any(self) -> bool {
        self.unfenced || self.healed_quotes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParsedStep {
    ToolCall { call: ToolCall, leniency: Leniency },
    FinalAnswer { text: String },
    ParseError { error: String, observation: String },
}

impl ParsedStep {
    fn error(error: impl Into<String>) -> Self {
        let error = error.into();
        let observation = render_error(&error);
        Self::ParseError { error, observation }
    }

    pub fn tool_call(&self) -> Option<&ToolCall> {
        match self {
            Self::ToolCall { call, .. } => Some(call),
            _ => None,
        }
    }
}

/// Total: every input maps to exactly one [`ParsedStep`].
pub fn parse_response(generated: &str, toolkit: &Toolkit) -> ParsedStep {
    let text = generated
        .find(OBSERVATION)
        .map_or(generated, |i| &generated[..i]);

    let blocks = fenced_blocks(text);
    let (content, mut leniency) = match blocks.as_slice() {
        [] => {
            if let Some(answer) = final_answer(text) {
                return ParsedStep::FinalAnswer { text: answer };
            }
            match bare_object(text) {
                Some(obj) => (obj, Leniency { unfenced: true, healed_quotes: false }),
                None => return ParsedStep::error("no JSON blob found: the action must be a single JSON object inside a markdown code block"),
            }
        }
        [(content, closed)] => (
            *content,
            Leniency {
                unfenced: !closed,
                healed_quotes: false,
            },
        ),
        many => {
            return ParsedStep::error(format!(
                "multiple actions: found {} JSON blobs but only a SINGLE action is allowed",
                many.len()
            ))
        }
    };

    let value = match serde_json::from_str::<Value>(content.trim()) {
        Ok(v) => v,
        Err(first) => match heal_quotes(content.trim()).and_then(|h| serde_json::from_str(&h).ok())
        {
            Some(v) => {
                leniency.healed_quotes = true;
                v
            }
            None => return ParsedStep::error(format!("invalid JSON: {first}")),
        },
    };

    match to_tool_call(value, toolkit) {
        Ok(call) => ParsedStep::ToolCall { call, leniency },
        Err(e) => ParsedStep::error(e),
    }
}

fn to_tool_call(value: Value, toolkit: &Toolkit) -> Result<ToolCall, String> {
    let mut obj = match value {
        Value::Object(o) => o,
        Value::Array(_) => {
            return Err("multiple actions: expected a single JSON object, found a list".into())
        }
        other => return Err(format!("expected a JSON object, found {}", kind(&other))),
    };
    let action = match obj.remove("action") {
        Some(Value::String(s)) => s,
        Some(other) => return Err(format!("`action` must be a string, found {}", kind(&other))),
        None => return Err("missing key `action`".into()),
    };
    if !toolkit.contains(&action) {
        return Err(format!(
            "unknown action `{action}`; valid actions are: {}",
            toolkit.names().join(", ")
        ));
    }
    let input = match obj.remove("action_input") {
        Some(v) => v,
        None => return Err("missing key `action_input`".into()),
    };
    let action_input = match input {
        Value::String(s) => ActionInput::Text(s),
        Value::Number(n) => match n.as_i64() {
            Some(i) => ActionInput::Int(i),
            None => ActionInput::Float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::Array(v) => ActionInput::List(v),
        other => {
            return Err(format!(
                "invalid type for `action_input`: expected str, int, list or float, found {}",
                kind(&other)
            ))
        }
    };
    Ok(ToolCall {
        action,
        action_input,
    })
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "bool",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "list",
        Value::Object(_) => "object",
    }
}

/// Contents of markdown code blocks with a closed flag. An optional language
/// tag on the opening fence line is skipped. A trailing unclosed fence yields
/// a block running to the end of the text.
fn fenced_blocks(text: &str) -> Vec<(&str, bool)> {
    let mut blocks = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find(FENCE) {
        let after = &rest[open + FENCE.len()..];
        let body_start = match after.find('\n') {
            Some(nl)
                if after[..nl]
                    .trim()
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric()) =>
            {
                nl + 1
            }
            _ => 0,
        };
        let body = &after[body_start..];
        match body.find(FENCE) {
            Some(close) => {
                blocks.push((&body[..close], true));
                rest = &body[close + FENCE.len()..];
            }
            None => {
                blocks.push((body, false));
                break;
            }
        }
    }
    blocks
}

fn final_answer(text: &str) -> Option<String> {
    text.find(FINAL_ANSWER)
        .map(|i| text[i + FINAL_ANSWER.len()..].trim().to_owned())
}

/// The first balanced `{...}` span, ignoring braces inside strings.
fn bare_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_str: Option<char> = None;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if let Some(q) = in_str {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                in_str = None;
            }
            continue;
        }
        match c {
            '"' | '\'' => in_str = Some(c),
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Rewrites single-quoted strings as double-quoted ones, leaving
/// double-quoted strings untouched. `None` when nothing changed.
fn heal_quotes(text: &str) -> Option<String> {
    if !text.contains('\'') {
        return None;
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' => {
                out.push('"');
                let mut escaped = false;
                for d in chars.by_ref() {
                    out.push(d);
                    if escaped {
                        escaped = false;
                    } else if d == '\\' {
                        escaped = true;
                    } else if d == '"' {
                        break;
                    }
                }
            }
            '\'' => {
                out.push('"');
                let mut escaped = false;
                while let Some(d) = chars.next() {
                    if escaped {
                        out.push(d);
                        escaped = false;
                    } else if d == '\\' {
                        escaped = true;
                        if chars.peek() != Some(&'\'') {
                            out.push('\\');
                        }
                    } else if d == '\'' {
                        break;
                    } else if d == '"' {
                        out.push_str("\\\"");
                    } else {
                        out.push(d);
                    }
                }
                out.push('"');
            }
            _ => out.push(c),
        }
    }
    Some(out)
}

/// Splits a full transcript at its observation lines and parses each
/// generation segment. Observation lines themselves are not parsed.
pub fn parse_transcript(transcript: &str, toolkit: &Toolkit) -> Vec<ParsedStep> {
    let mut steps = Vec::new();
    let mut segment = String::new();
    for line in transcript.split_inclusive('\n') {
        if line.starts_with(OBSERVATION) {
            steps.push(parse_response(&segment, toolkit));
            segment.clear();
        } else {
            segment.push_str(line);
        }
    }
    if !segment.trim().is_empty() {
        steps.push(parse_response(&segment, toolkit));
    }
    steps
}
