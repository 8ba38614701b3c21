use crate::error::{GatewayError, Result};
use crate::request::{GenerationRequest, TextGenerator};

/// Chat-template header after which the agent's own generations start.
pub const ASSISTANT_HEADER: &str = "<|im_start|>assistant\n";

/// Number of observations already appended after the last assistant header,
/// i.e. how many generations the current episode has consumed.
pub fn step_index(prompt: &str) -> usize {
    let tail = prompt
        .rfind(ASSISTANT_HEADER)
        .map_or(prompt, |i| &prompt[i + ASSISTANT_HEADER.len()..]);
    tail.lines()
        .filter(|l| l.starts_with("Observation:"))
        .count()
}

/// Replays canned segments. The segment returned is a pure function of the
/// prompt: the episode's step index selects it, and when per-task scripts
/// are registered the first one whose key occurs in the prompt is used.
#[derive(Debug, Clone, Default)]
pub struct ScriptedGenerator {
    default: Vec<String>,
    by_task: Vec<(String, Vec<String>)>,
    name: String,
}

impl ScriptedGenerator {
    pub fn new(segments: Vec<String>) -> Self {
        Self {
            default: segments,
            by_task: Vec::new(),
            name: "scripted".into(),
        }
    }

    /// Script used when `key` occurs in the prompt.
    pub fn with_task_script(mut self, key: impl Into<String>, segments: Vec<String>) -> Self {
        self.by_task.push((key.into(), segments));
        self
    }

    fn script_for(&self, prompt: &str) -> &[String] {
        self.by_task
            .iter()
            .find(|(k, _)| prompt.contains(k.as_str()))
            .map_or(&self.default, |(_, s)| s)
    }
}

impl TextGenerator for ScriptedGenerator {
    fn complete(&self, request: &GenerationRequest) -> Result<String> {
        let script = self.script_for(&request.prompt);
        let step = step_index(&request.prompt);
        script
            .get(step)
            .cloned()
            .ok_or(GatewayError::ScriptExhausted {
                step,
                len: script.len(),
            })
    }

    fn model_name(&self) -> &str {
        &self.name
    }
}

/// Adapts a closure over the prompt, for rule-based stand-ins.
pub struct FnGenerator<F> {
    f: F,
    name: String,
}

impl<F> FnGenerator<F>
where
    F: Fn(&str) -> Result<String> + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            f,
            name: name.into(),
        }
    }
}

impl<F> TextGenerator for FnGenerator<F>
where
    F: Fn(&str) -> Result<String> + Send + Sync,
{
    fn complete(&self, request: &GenerationRequest) -> Result<String> {
        (self.f)(&request.prompt)
    }

    fn model_name(&self) -> &str {
        &self.name
    }
}

impl std::fmt::Debug for dyn TextGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TextGenerator({})", self.model_name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(prompt: &str) -> GenerationRequest {
        GenerationRequest::new(prompt, vec!["Observation:".into()], 256).unwrap()
    }

    #[test]
    fn replays_by_step() {
        let g = ScriptedGenerator::new(vec!["one\nObservation: leaked".into(), "two".into()]);
        let base = format!("sys{ASSISTANT_HEADER}");
        assert_eq!(g.generate(&req(&base)).unwrap(), "one\n");
        let next = format!("{base}one\nObservation: hi\n");
        assert_eq!(g.generate(&req(&next)).unwrap(), "two");
        let done = format!("{next}two\nObservation: ok\n");
        assert!(matches!(
            g.generate(&req(&done)),
            Err(GatewayError::ScriptExhausted { step: 2, len: 2 })
        ));
    }

    #[test]
    fn task_scripts_take_precedence() {
        let g = ScriptedGenerator::new(vec!["d".into()]).with_task_script("city", vec!["c".into()]);
        assert_eq!(g.generate(&req("find the city")).unwrap(), "c");
        assert_eq!(g.generate(&req("find the date")).unwrap(), "d");
    }
}
