use crate::prompts::TOOL_DESCRIPTION;

pub const ASK_USER: &str = "ask_user";
pub const STORE: &str = "store";

/// The tools offered to the agent: their names (the only valid `action`
/// values) and the description block shown in the prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toolkit {
    names: Vec<String>,
    description: String,
}

impl Toolkit {
    /// `ask_user` and `store`.
    pub fn standard() -> Self {
        Self {
            names: vec![ASK_USER.into(), STORE.into()],
            description: TOOL_DESCRIPTION.into(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }
}

impl Default for Toolkit {
    fn default() -> Self {
        Self::standard()
    }
}
