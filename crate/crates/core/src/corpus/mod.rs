//! Annotated articles, the graded lexicon, and shared string utilities.
//!
//! Annotations (tokens, POS tags, lemmas, constituency parses, coreference
//! chains) are input data produced by external tools. Everything here is
//! immutable after loading.

mod article;
mod levenshtein;
mod lexicon;
mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use article::{
    load_article, load_article_file, load_articles_dir, AnnotatedArticle, CorefChain, Gender,
    Mention, MentionKind, Number, Sentence, Token,
};
pub use levenshtein::levenshtein;
pub use lexicon::{GradedLexicon, LexiconError, PosClass};
pub use tree::{parse_bracketed, ParseNode, TokenSpan, TreeError};

/// A difficulty or proficiency level on the 1..=6 grade scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Level(u8);

impl Level {
    pub const MIN: Level = Level(1);
    pub const MAX: Level = Level(6);

    pub fn new(value: u8) -> Option<Level> {
        (1..=6).contains(&value).then_some(Level(value))
    }

    /// Clamps any integer onto the scale.
    pub fn clamped(value: i64) -> Level {
        Level(value.clamp(1, 6) as u8)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = Level> {
        (1..=6).map(Level)
    }

    /// Zero-based index, handy for `[T; 6]` tables.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn offset(self, delta: i64) -> Option<Level> {
        let v = self.0 as i64 + delta;
        (1..=6).contains(&v).then_some(Level(v as u8))
    }
}

impl TryFrom<u8> for Level {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Level::new(value).ok_or_else(|| format!("level {value} outside 1..=6"))
    }
}

impl From<Level> for u8 {
    fn from(level: Level) -> u8 {
        level.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Errors raised while loading annotated articles.
#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("alignment error in sentences[{sentence}]: {message}")]
    Alignment { sentence: usize, message: String },
    #[error("dangling mention at {path}: {message}")]
    DanglingMention { path: String, message: String },
    #[error("parse error at {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: TreeError,
    },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CorpusError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for validation failures, false for I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, CorpusError::Io { .. })
    }
}
