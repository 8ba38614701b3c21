//! Prompt assets and `$PLACEHOLDER` rendering.
//!
//! Only the placeholders a template declares are substituted; any other
//! `$WORD` (the agent prompt uses `$JSON_BLOB`, `$TOOL_NAME`, `$INPUT` and
//! `$ANSWER` as literal notation) is copied through unchanged.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tasks::ParameterTask;
use crate::tools::Toolkit;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("template `{template}` has no binding for ${placeholder}")]
    MissingBinding {
        template: &'static str,
        placeholder: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Template {
    pub name: &'static str,
    pub text: &'static str,
    pub placeholders: &'static [&'static str],
}

impl Template {
    /// Substitutes every declared placeholder in one pass; substituted text
    /// is never rescanned.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, PromptError> {
        let lookup = |name: &str| bindings.iter().find(|(k, _)| *k == name).map(|(_, v)| *v);
        if let Some(missing) = self.placeholders.iter().find(|p| lookup(p).is_none()) {
            return Err(PromptError::MissingBinding {
                template: self.name,
                placeholder: missing,
            });
        }
        let mut out = String::with_capacity(self.text.len());
        let mut rest = self.text;
        while let Some(i) = rest.find('$') {
            out.push_str(&rest[..i]);
            let after = &rest[i + 1..];
            let len = after
                .find(|c: char| !(c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_'))
                .unwrap_or(after.len());
            let ident = &after[..len];
            match self
                .placeholders
                .contains(&ident)
                .then(|| lookup(ident))
                .flatten()
            {
                Some(value) => out.push_str(value),
                None => {
                    out.push('$');
                    out.push_str(ident);
                }
            }
            rest = &after[len..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

pub const AGENT_PROMPT_REACT: Template = Template {
    name: "agent_prompt_react",
    text: include_str!("../assets/agent_prompt_react.txt"),
    placeholders: &["TOOLS_DESCRIPTION", "TOOLS_LIST"],
};

pub const AGENT_PROMPT_ACT: Template = Template {
    name: "agent_prompt_act",
    text: include_str!("../assets/agent_prompt_act.txt"),
    placeholders: &["TOOLS_DESCRIPTION", "TOOLS_LIST"],
};

pub const CHAT_TEMPLATE: Template = Template {
    name: "chat_template",
    text: include_str!("../assets/chat_template.txt"),
    placeholders: &["PROMPT_TEMPLATE", "TASK_EXAMPLE", "EXAMPLE", "TASK"],
};

pub const CHAT_TEMPLATE_ACT: Template = Template {
    name: "chat_template_act",
    text: include_str!("../assets/chat_template_act.txt"),
    placeholders: &["PROMPT_TEMPLATE", "TASK"],
};

pub const ERROR_MESSAGE: Template = Template {
    name: "error_message",
    text: include_str!("../assets/error_message.txt"),
    placeholders: &["ERROR"],
};

pub const TOOL_DESCRIPTION: &str = include_str!("../assets/tool_description.txt");
pub const TASK_EXAMPLE: &str = include_str!("../assets/task_example.txt");
pub const EXAMPLE_REACT: &str = include_str!("../assets/example_react.txt");
pub const EXAMPLE_ACT: &str = include_str!("../assets/example_act.txt");

const USER_PLACEHOLDERS: &[&str] = &[
    "CITY",
    "EV",
    "TMIN",
    "TMAX",
    "ARRIVAL_TIME",
    "LEAVING_TIME",
    "DATE1",
    "DATE2",
];

pub const USER_PROMPT_EASY: Template = Template {
    name: "user_easy",
    text: include_str!("../assets/user_easy.txt"),
    placeholders: USER_PLACEHOLDERS,
};

pub const USER_PROMPT_MEDIUM: Template = Template {
    name: "user_medium",
    text: include_str!("../assets/user_medium.txt"),
    placeholders: USER_PLACEHOLDERS,
};

pub const USER_PROMPT_HARD: Template = Template {
    name: "user_hard",
    text: include_str!("../assets/user_hard.txt"),
    placeholders: USER_PLACEHOLDERS,
};

pub const USER_CHAT_TEMPLATE: Template = Template {
    name: "user_chat_template",
    text: include_str!("../assets/user_chat_template.txt"),
    placeholders: &["USER_PROMPT", "QUERY"],
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentType {
    Act,
    ActWithExample,
    ReactWithExample,
}

impl AgentType {
    pub const ALL: [AgentType; 3] = [Self::Act, Self::ActWithExample, Self::ReactWithExample];

    pub fn uses_thoughts(self) -> bool {
        self == Self::ReactWithExample
    }

    pub fn uses_example(self) -> bool {
        self != Self::Act
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Act => "Act",
            Self::ActWithExample => "Act+example",
            Self::ReactWithExample => "ReAct+example",
        }
    }
}

impl fmt::Display for AgentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AgentType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "act" => Ok(Self::Act),
            "actexample" | "actwithexample" => Ok(Self::ActWithExample),
            "reactexample" | "reactwithexample" | "react" => Ok(Self::ReactWithExample),
            _ => Err(format!(
                "unknown agent type `{s}` (expected act, act+example or react+example)"
            )),
        }
    }
}

/// The rendered initial prompt for one task: system instructions, the worked
/// example unless `agent_type` is [`AgentType::Act`], and the task, ending
/// with the assistant header the model continues from.
pub fn render_agent_prompt(
    agent_type: AgentType,
    toolkit: &Toolkit,
    task: &ParameterTask,
) -> Result<String, PromptError> {
    let template = if agent_type.uses_thoughts() {
        AGENT_PROMPT_REACT
    } else {
        AGENT_PROMPT_ACT
    };
    let tools_list = toolkit.names().join(", ");
    let system = template.render(&[
        ("TOOLS_DESCRIPTION", toolkit.description()),
        ("TOOLS_LIST", &tools_list),
    ])?;
    if agent_type.uses_example() {
        let example = if agent_type.uses_thoughts() {
            EXAMPLE_REACT
        } else {
            EXAMPLE_ACT
        };
        CHAT_TEMPLATE.render(&[
            ("PROMPT_TEMPLATE", &system),
            ("TASK_EXAMPLE", TASK_EXAMPLE),
            ("EXAMPLE", example),
            ("TASK", &task.text),
        ])
    } else {
        CHAT_TEMPLATE_ACT.render(&[("PROMPT_TEMPLATE", &system), ("TASK", &task.text)])
    }
}

/// The error observation shown to the agent for a malformed response.
pub fn render_error(error: &str) -> String {
    ERROR_MESSAGE
        .render(&[("ERROR", error)])
        .expect("error template binds only $ERROR")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{standard_tasks, ParameterId};

    #[test]
    fn undeclared_dollar_words_survive() {
        let t = Template {
            name: "t",
            text: "$A and $AB and $JSON_BLOB, $ and $a",
            placeholders: &["A", "AB"],
        };
        assert_eq!(
            t.render(&[("A", "x$AB"), ("AB", "y")]).unwrap(),
            "x$AB and y and $JSON_BLOB, $ and $a"
        );
    }

    #[test]
    fn missing_binding_names_placeholder() {
        let err = USER_CHAT_TEMPLATE
            .render(&[("USER_PROMPT", "p")])
            .unwrap_err();
        assert_eq!(
            err,
            PromptError::MissingBinding {
                template: "user_chat_template",
                placeholder: "QUERY"
            }
        );
        assert!(err.to_string().contains("$QUERY"));
    }

    #[test]
    fn react_prompt_keeps_format_block() {
        let task = &standard_tasks()[0];
        assert_eq!(task.parameter, ParameterId::City);
        let p =
            render_agent_prompt(AgentType::ReactWithExample, &Toolkit::standard(), task).unwrap();
        assert!(p.contains("ALWAYS use the following format:\nTask: The input task you must answer.\nThought: You should always think about one action to solve the task.\nAction: $JSON_BLOB\nObservation: The result of the action.\n"));
        assert!(p.contains("The only values $TOOL_NAME that should be in the \"action\" field are: ask_user, store\n"));
        assert!(p.contains(TOOL_DESCRIPTION));
        assert!(p.contains(EXAMPLE_REACT));
        assert!(p.ends_with(&format!(
            "<|im_start|>agent\n{}<|im_end|>\n<|im_start|>assistant\n",
            task.text
        )));
    }

    #[test]
    fn act_prompt_drops_thoughts_and_example() {
        let task = &standard_tasks()[3];
        let act = render_agent_prompt(AgentType::Act, &Toolkit::standard(), task).unwrap();
        assert!(!act.contains("Thought:"));
        assert!(!act.contains(TASK_EXAMPLE));
        assert_eq!(act.matches("<|im_start|>").count(), 3);

        let with_example =
            render_agent_prompt(AgentType::ActWithExample, &Toolkit::standard(), task).unwrap();
        assert!(!with_example.contains("Thought:"));
        assert!(with_example.contains(EXAMPLE_ACT));
        assert_eq!(with_example.matches("<|im_start|>").count(), 5);
    }

    #[test]
    fn agent_type_names_round_trip() {
        for t in AgentType::ALL {
            assert_eq!(t.label().parse::<AgentType>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<AgentType>(&json).unwrap(), t);
        }
        assert!("plan".parse::<AgentType>().is_err());
    }
}
