use std::sync::Arc;

use hems_agent::prompts::USER_CHAT_TEMPLATE;
use hems_agent::{PromptError, UserChannel, UserError};
use hems_gateway::{GenerationRequest, TextGenerator};

use crate::mode::DifficultyMode;
use crate::persona::PersonaGroundTruth;
use crate::render_user_prompt;

/// Stop sequences for the user model: the end of its turn.
pub const USER_STOP: [&str; 1] = ["<|im_end|>"];

/// Full chat prompt asking the persona `question`.
pub fn render_user_query(
    mode: DifficultyMode,
    truth: &PersonaGroundTruth,
    question: &str,
) -> Result<String, PromptError> {
    let system = render_user_prompt(mode, truth)?;
    USER_CHAT_TEMPLATE.render(&[("USER_PROMPT", &system), ("QUERY", question)])
}

/// User played by a language model.
#[derive(Debug, Clone)]
pub struct LlmUser {
    pub mode: DifficultyMode,
    pub truth: PersonaGroundTruth,
    generator: Arc<dyn TextGenerator>,
    max_tokens: u32,
}

impl LlmUser {
    pub fn new(
        mode: DifficultyMode,
        truth: PersonaGroundTruth,
        generator: Arc<dyn TextGenerator>,
    ) -> Self {
        Self {
            mode,
            truth,
            generator,
            max_tokens: 96,
        }
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }
}

impl UserChannel for LlmUser {
    fn ask(&mut self, question: &str) -> Result<String, UserError> {
        let prompt = render_user_query(self.mode, &self.truth, question)
            .map_err(|e| UserError(e.to_string()))?;
        let request = GenerationRequest::new(
            prompt,
            USER_STOP.iter().map(|s| s.to_string()).collect(),
            self.max_tokens,
        )
        .map_err(|e| UserError(e.to_string()))?;
        let text = self
            .generator
            .generate(&request)
            .map_err(|e| UserError(e.to_string()))?;
        let answer = text.trim();
        if answer.is_empty() {
            return Err(UserError("the user model returned an empty answer".into()));
        }
        // answers are observations and must stay on one line
        Ok(answer.split_whitespace().collect::<Vec<_>>().join(" "))
    }
}
