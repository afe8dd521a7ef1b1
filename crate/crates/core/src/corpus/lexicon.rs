use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Level, Token};

/// Coarse part-of-speech classes used by the graded word list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosClass {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl PosClass {
    /// Collapses a Penn Treebank tag: NN* noun, VB* verb, JJ* adjective, RB* adverb.
    pub fn from_penn(tag: &str) -> PosClass {
        if tag.starts_with("NN") {
            PosClass::Noun
        } else if tag.starts_with("VB") {
            PosClass::Verb
        } else if tag.starts_with("JJ") {
            PosClass::Adjective
        } else if tag.starts_with("RB") {
            PosClass::Adverb
        } else {
            PosClass::Other
        }
    }

    pub fn is_content(self) -> bool {
        self != PosClass::Other
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PosClass::Noun => "noun",
            PosClass::Verb => "verb",
            PosClass::Adjective => "adjective",
            PosClass::Adverb => "adverb",
            PosClass::Other => "other",
        }
    }
}

impl fmt::Display for PosClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noun" | "n" => Ok(PosClass::Noun),
            "verb" | "v" => Ok(PosClass::Verb),
            "adjective" | "adj" | "a" => Ok(PosClass::Adjective),
            "adverb" | "adv" | "r" => Ok(PosClass::Adverb),
            "other" => Ok(PosClass::Other),
            other => Err(format!("unknown POS class {other:?}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Word list mapping (lowercased word, POS class) to a level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GradedLexicon {
    entries: BTreeMap<(String, PosClass), Level>,
}

impl GradedLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, pos: PosClass, level: Level) {
        self.entries.insert((word.to_lowercase(), pos), level);
    }

    /// Parses tab-separated `word<TAB>pos_class<TAB>level` lines; `#` starts a comment.
    pub fn parse_tsv(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon = GradedLexicon::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(LexiconError::Format {
                    line: line_no,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            if fields[0].is_empty() {
                return Err(LexiconError::Format {
                    line: line_no,
                    message: "empty word".into(),
                });
            }
            let pos = fields[1]
                .parse::<PosClass>()
                .map_err(|message| LexiconError::Format { line: line_no, message })?;
            let level = fields[2]
                .parse::<u8>()
                .ok()
                .and_then(Level::new)
                .ok_or_else(|| LexiconError::Format {
                    line: line_no,
                    message: format!("level {:?} not in 1..=6", fields[2]),
                })?;
            lexicon.insert(fields[0], pos, level);
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_tsv(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# word\tpos_class\tlevel\n");
        for ((word, pos), level) in &self.entries {
            out.push_str(&format!("{word}\t{pos}\t{level}\n"));
        }
        out
    }

    /// Exact (word, POS class) lookup, case-insensitive.
    pub fn lookup_level(&self, word: &str, pos: PosClass) -> Option<Level> {
        self.entries.get(&(word.to_lowercase(), pos)).copied()
    }

    /// Looks a token up by lemma first, then by surface form.
    pub fn lookup_token(&self, token: &Token) -> Option<Level> {
        let pos = PosClass::from_penn(&token.pos);
        self.lookup_level(&token.lemma, pos)
            .or_else(|| self.lookup_level(&token.text, pos))
    }

    /// Words listed at `level` under `pos`, in lexicographic order.
    pub fn words_at(&self, level: Level, pos: PosClass) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(move |((_, p), l)| *p == pos && **l == level)
            .map(|((w, _), _)| w.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
