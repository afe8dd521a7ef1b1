use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::template::DistractorTemplate;
use super::GrammarError;
use crate::corpus::{parse_bracketed, Level, ParseNode, Sentence, Token};
use crate::treequery::{compile, Pattern};

/// A named grammar construction with its query and distractor recipes.
#[derive(Debug, Clone)]
pub struct GrammarPattern {
    pub id: String,
    pub name: String,
    pub query_source: String,
    pub query: Pattern,
    /// Captures whose covering token range is blanked.
    pub answer_captures: Vec<String>,
    pub part_captures: BTreeMap<String, String>,
    pub distractor_templates: [DistractorTemplate; 3],
    pub fallback_difficulty: Level,
    pub difficulty: Level,
    pub example_parse: String,
    pub example_lemmas: BTreeMap<String, String>,
}

impl GrammarPattern {
    /// The example sentence as a tokenized [`Sentence`].
    pub fn example_sentence(&self) -> Result<Sentence, GrammarError> {
        example_sentence(&self.id, &self.example_parse, &self.example_lemmas)
    }
}

fn example_sentence(
    id: &str,
    parse: &str,
    lemmas: &BTreeMap<String, String>,
) -> Result<Sentence, GrammarError> {
    let tree: ParseNode = parse_bracketed(parse).map_err(|e| GrammarError::Registry {
        pattern: id.to_string(),
        message: format!("example parse: {e}"),
    })?;
    let words: Vec<String> = tree.leaves().iter().map(|l| l.label.clone()).collect();
    let tags: Vec<String> = tree.pos_tags().iter().map(|t| t.to_string()).collect();
    let tokens = words
        .iter()
        .zip(&tags)
        .enumerate()
        .map(|(index, (w, pos))| Token {
            index,
            text: w.clone(),
            lemma: lemmas
                .get(w)
                .cloned()
                .unwrap_or_else(|| w.to_lowercase()),
            pos: pos.clone(),
        })
        .collect();
    Sentence::new(words.join(" "), tokens, tree).map_err(|message| GrammarError::Registry {
        pattern: id.to_string(),
        message,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPattern {
    id: String,
    name: String,
    query: String,
    answer_capture: OneOrMany,
    #[serde(default)]
    parts: BTreeMap<String, String>,
    distractors: Vec<DistractorTemplate>,
    fallback_difficulty: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    difficulty: Option<u8>,
    example_sentence: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    example_lemmas: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawRegistry {
    pattern: Vec<RawPattern>,
}

/// The ordered set of grammar patterns. Order breaks ties during generation.
#[derive(Debug, Clone)]
pub struct Registry {
    pub patterns: Vec<GrammarPattern>,
}

impl Registry {
    pub fn parse_toml(text: &str) -> Result<Registry, GrammarError> {
        let raw: RawRegistry = toml::from_str(text).map_err(|e| GrammarError::Registry {
            pattern: "<file>".into(),
            message: e.to_string(),
        })?;
        let mut patterns = Vec::with_capacity(raw.pattern.len());
        for rp in raw.pattern {
            if patterns.iter().any(|p: &GrammarPattern| p.id == rp.id) {
                return Err(GrammarError::Registry {
                    pattern: rp.id,
                    message: "duplicate pattern id".into(),
                });
            }
            patterns.push(convert(rp)?);
        }
        Ok(Registry { patterns })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Registry, GrammarError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GrammarError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        let raw = RawRegistry {
            pattern: self
                .patterns
                .iter()
                .map(|p| RawPattern {
                    id: p.id.clone(),
                    name: p.name.clone(),
                    query: p.query_source.clone(),
                    answer_capture: if p.answer_captures.len() == 1 {
                        OneOrMany::One(p.answer_captures[0].clone())
                    } else {
                        OneOrMany::Many(p.answer_captures.clone())
                    },
                    parts: p.part_captures.clone(),
                    distractors: p.distractor_templates.to_vec(),
                    fallback_difficulty: p.fallback_difficulty.get(),
                    difficulty: Some(p.difficulty.get()),
                    example_sentence: p.example_parse.clone(),
                    example_lemmas: p.example_lemmas.clone(),
                })
                .collect(),
        };
        toml::to_string_pretty(&raw).expect("registry serializes")
    }

    pub fn get(&self, id: &str) -> Option<&GrammarPattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn at_level(&self, level: Level) -> impl Iterator<Item = (usize, &GrammarPattern)> {
        self.patterns
            .iter()
            .enumerate()
            .filter(move |(_, p)| p.difficulty == level)
    }
}

fn convert(rp: RawPattern) -> Result<GrammarPattern, GrammarError> {
    let err = |message: String| GrammarError::Registry {
        pattern: rp.id.clone(),
        message,
    };
    let query = compile(&rp.query).map_err(|e| err(format!("query: {e}")))?;
    let declared = query.captures();
    let answer_captures = match &rp.answer_capture {
        OneOrMany::One(s) => vec![s.clone()],
        OneOrMany::Many(v) => v.clone(),
    };
    if answer_captures.is_empty() {
        return Err(err("answer_capture is empty".into()));
    }
    for name in answer_captures.iter().chain(rp.parts.keys()) {
        if !declared.contains(&name.as_str()) {
            return Err(err(format!("capture {name:?} is not declared in the query")));
        }
    }
    let templates: [DistractorTemplate; 3] = rp
        .distractors
        .clone()
        .try_into()
        .map_err(|v: Vec<_>| err(format!("expected exactly 3 distractors, found {}", v.len())))?;
    for (i, t) in templates.iter().enumerate() {
        for name in t.captures() {
            if !declared.contains(&name) {
                return Err(GrammarError::Template {
                    pattern: rp.id.clone(),
                    step: format!("distractors[{i}]: capture {name:?} not declared"),
                });
            }
        }
    }
    let fallback = Level::new(rp.fallback_difficulty)
        .ok_or_else(|| err(format!("fallback_difficulty {} not in 1..=6", rp.fallback_difficulty)))?;
    let difficulty = match rp.difficulty {
        None => fallback,
        Some(d) => Level::new(d).ok_or_else(|| err(format!("difficulty {d} not in 1..=6")))?,
    };
    // validate the example eagerly so a broken registry fails at load
    example_sentence(&rp.id, &rp.example_sentence, &rp.example_lemmas)?;
    Ok(GrammarPattern {
        id: rp.id.clone(),
        name: rp.name.clone(),
        query_source: rp.query.clone(),
        query,
        answer_captures,
        part_captures: rp.parts.clone(),
        distractor_templates: templates,
        fallback_difficulty: fallback,
        difficulty,
        example_parse: rp.example_sentence.clone(),
        example_lemmas: rp.example_lemmas.clone(),
    })
}
