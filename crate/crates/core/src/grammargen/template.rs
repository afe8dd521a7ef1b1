//! Distractor recipes: `lit:TEXT`, `cap:NAME`, `inflect:NAME:FORM`, or the
//! whole-recipe `none-of-the-above`. Steps are whitespace separated and
//! their outputs joined with single spaces.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::inflect::VerbForm;

pub const NONE_OF_THE_ABOVE: &str = "none of the above";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmitStep {
    Literal(String),
    Capture(String),
    Inflect(String, VerbForm),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistractorTemplate {
    Recipe(Vec<EmitStep>),
    NoneOfTheAbove,
}

impl DistractorTemplate {
    pub fn parse(source: &str) -> Result<Self, String> {
        let source = source.trim();
        if source == "none-of-the-above" {
            return Ok(DistractorTemplate::NoneOfTheAbove);
        }
        let mut steps = Vec::new();
        for step in source.split_whitespace() {
            let (kind, rest) = step
                .split_once(':')
                .ok_or_else(|| format!("step {step:?} lacks a `kind:` prefix"))?;
            match kind {
                "lit" if !rest.is_empty() => steps.push(EmitStep::Literal(rest.to_string())),
                "cap" if !rest.is_empty() => steps.push(EmitStep::Capture(rest.to_string())),
                "inflect" => {
                    let (name, form) = rest
                        .split_once(':')
                        .ok_or_else(|| format!("step {step:?} needs inflect:NAME:FORM"))?;
                    steps.push(EmitStep::Inflect(name.to_string(), form.parse()?));
                }
                _ => return Err(format!("unknown or empty step {step:?}")),
            }
        }
        if steps.is_empty() {
            return Err("recipe has no steps".into());
        }
        Ok(DistractorTemplate::Recipe(steps))
    }

    /// Capture names the recipe reads.
    pub fn captures(&self) -> Vec<&str> {
        match self {
            DistractorTemplate::NoneOfTheAbove => Vec::new(),
            DistractorTemplate::Recipe(steps) => steps
                .iter()
                .filter_map(|s| match s {
                    EmitStep::Literal(_) => None,
                    EmitStep::Capture(n) | EmitStep::Inflect(n, _) => Some(n.as_str()),
                })
                .collect(),
        }
    }
}

impl TryFrom<String> for DistractorTemplate {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        DistractorTemplate::parse(&value)
    }
}

impl From<DistractorTemplate> for String {
    fn from(t: DistractorTemplate) -> String {
        t.to_string()
    }
}

impl fmt::Display for DistractorTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistractorTemplate::NoneOfTheAbove => f.write_str("none-of-the-above"),
            DistractorTemplate::Recipe(steps) => {
                let parts: Vec<String> = steps
                    .iter()
                    .map(|s| match s {
                        EmitStep::Literal(t) => format!("lit:{t}"),
                        EmitStep::Capture(n) => format!("cap:{n}"),
                        EmitStep::Inflect(n, form) => format!("inflect:{n}:{form}"),
                    })
                    .collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}
