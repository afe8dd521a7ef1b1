//! Shared multiple-choice question shape and question types.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Level;

/// Question type, which doubles as the learner skill it measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QType {
    Vocabulary,
    Grammar,
    Reading,
}

impl QType {
    pub const ALL: [QType; 3] = [QType::Vocabulary, QType::Grammar, QType::Reading];

    pub fn index(self) -> usize {
        match self {
            QType::Vocabulary => 0,
            QType::Grammar => 1,
            QType::Reading => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QType::Vocabulary => "vocabulary",
            QType::Grammar => "grammar",
            QType::Reading => "reading",
        }
    }
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vocabulary" => Ok(QType::Vocabulary),
            "grammar" => Ok(QType::Grammar),
            "reading" => Ok(QType::Reading),
            other => Err(format!("unknown question type {other:?}")),
        }
    }
}

/// Where a question came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    pub article: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<usize>,
}

/// A generated four-option question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McQuestion {
    pub stem: String,
    pub answer: String,
    pub distractors: [String; 3],
    pub difficulty: Level,
    pub concept: String,
    pub source: SourceRef,
}

impl McQuestion {
    /// Answer and distractors are pairwise distinct (case-insensitive, whitespace-normalized).
    pub fn options_distinct(&self) -> bool {
        let mut keys: Vec<String> = std::iter::once(&self.answer)
            .chain(self.distractors.iter())
            .map(|s| normalize(s))
            .collect();
        keys.sort();
        keys.dedup();
        keys.len() == 4
    }
}

/// Lowercased with runs of whitespace collapsed.
pub fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Blank marker used in cloze stems.
pub const BLANK: &str = "_____";
