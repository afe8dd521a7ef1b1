//! Grammar questions: a registry of tree patterns with distractor recipes,
//! difficulty calibration against a graded textbook corpus, and generation.

pub mod inflect;
mod registry;
pub mod template;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{AnnotatedArticle, Level, Sentence, TokenSpan};
use crate::question::{normalize, McQuestion, SourceRef, BLANK};
use crate::treequery::{IndexedTree, MatchResult};

pub use inflect::{inflect, pluralize, VerbForm};
pub use registry::{GrammarPattern, Registry};
pub use template::{DistractorTemplate, EmitStep, NONE_OF_THE_ABOVE};

#[derive(Debug, thiserror::Error)]
pub enum GrammarError {
    #[error("template error in pattern {pattern}: {step}")]
    Template { pattern: String, step: String },
    #[error("grade {0} has no sentences in the calibration corpus")]
    EmptyGrade(Level),
    #[error("calibration article {0:?} has no grade")]
    UngradedArticle(String),
    #[error("registry error in pattern {pattern}: {message}")]
    Registry { pattern: String, message: String },
    #[error("self-test failed for pattern {pattern}: {message}")]
    SelfTest { pattern: String, message: String },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Stem wording for grammar questions.
pub fn grammar_stem(blanked: &str) -> String {
    format!("In the Sentence, \"{blanked}\", the blank can be filled in:")
}

/// One match of a pattern, reduced to what question building needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub answer_span: TokenSpan,
    /// Token span of every bound capture, by name.
    pub captures: BTreeMap<String, TokenSpan>,
}

impl Instance {
    fn from_match(pattern: &GrammarPattern, m: &MatchResult<'_>) -> Result<Instance, GrammarError> {
        let captures: BTreeMap<String, TokenSpan> = m
            .captures
            .iter()
            .map(|(name, node)| (name.clone(), node.node.span))
            .collect();
        let mut span: Option<TokenSpan> = None;
        for name in &pattern.answer_captures {
            let s = *captures.get(name).ok_or_else(|| GrammarError::Template {
                pattern: pattern.id.clone(),
                step: format!("answer capture {name:?} unbound"),
            })?;
            span = Some(span.map_or(s, |acc| acc.cover(&s)));
        }
        Ok(Instance {
            answer_span: span.expect("answer_captures is non-empty"),
            captures,
        })
    }
}

/// Distinct-answer-span instances of one pattern in one sentence, in match order.
pub fn find_instances(
    pattern: &GrammarPattern,
    sentence: &Sentence,
) -> Result<Vec<Instance>, GrammarError> {
    find_in(pattern, &IndexedTree::new(&sentence.parse))
}

fn find_in(pattern: &GrammarPattern, tree: &IndexedTree<'_>) -> Result<Vec<Instance>, GrammarError> {
    let mut out: Vec<Instance> = Vec::new();
    for m in tree.match_all(&pattern.query) {
        let inst = Instance::from_match(pattern, &m)?;
        if !out.iter().any(|o| o.answer_span == inst.answer_span) {
            out.push(inst);
        }
    }
    Ok(out)
}

/// Instantiates one recipe against the captures of an instance.
pub fn instantiate(
    pattern: &GrammarPattern,
    template: &DistractorTemplate,
    sentence: &Sentence,
    instance: &Instance,
) -> Result<String, GrammarError> {
    let steps = match template {
        DistractorTemplate::NoneOfTheAbove => return Ok(NONE_OF_THE_ABOVE.to_string()),
        DistractorTemplate::Recipe(steps) => steps,
    };
    let bound = |name: &str| {
        instance
            .captures
            .get(name)
            .copied()
            .ok_or_else(|| GrammarError::Template {
                pattern: pattern.id.clone(),
                step: format!("capture {name:?} unbound"),
            })
    };
    let mut words = Vec::with_capacity(steps.len());
    for step in steps {
        match step {
            EmitStep::Literal(text) => words.push(text.clone()),
            EmitStep::Capture(name) => words.push(sentence.span_text(bound(name)?).to_string()),
            EmitStep::Inflect(name, form) => {
                let span = bound(name)?;
                if span.len() != 1 {
                    return Err(GrammarError::Template {
                        pattern: pattern.id.clone(),
                        step: format!("inflect:{name}:{form} needs a single-token capture"),
                    });
                }
                let token = &sentence.tokens[span.start];
                let mut word = inflect(&token.lemma, *form);
                if token.text.chars().next().is_some_and(char::is_uppercase) {
                    word = capitalize(&word);
                }
                words.push(word);
            }
        }
    }
    Ok(words.join(" "))
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Why a match did not become a question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discarded {
    pub pattern: String,
    pub sentence: usize,
    pub answer: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct GrammarBatch {
    pub questions: Vec<McQuestion>,
    pub discarded: Vec<Discarded>,
}

struct Candidate {
    order: usize,
    span: TokenSpan,
    question: McQuestion,
}

fn build_question(
    pattern: &GrammarPattern,
    article_id: &str,
    sentence_index: usize,
    sentence: &Sentence,
    instance: &Instance,
) -> Result<Result<McQuestion, String>, GrammarError> {
    let answer = sentence.span_text(instance.answer_span).to_string();
    let mut distractors = Vec::with_capacity(3);
    for t in &pattern.distractor_templates {
        distractors.push(instantiate(pattern, t, sentence, instance)?);
    }
    let question = McQuestion {
        stem: grammar_stem(&sentence.replace_span(instance.answer_span, BLANK)),
        answer,
        distractors: distractors.try_into().expect("three templates"),
        difficulty: pattern.difficulty,
        concept: pattern.id.clone(),
        source: SourceRef {
            article: article_id.to_string(),
            sentence: Some(sentence_index),
            token: Some(instance.answer_span.start),
        },
    };
    if !question.options_distinct() {
        let key = normalize(&question.answer);
        let reason = if question.distractors.iter().any(|d| normalize(d) == key) {
            "a distractor equals the answer"
        } else {
            "duplicate distractors"
        };
        return Ok(Err(reason.to_string()));
    }
    Ok(Ok(question))
}

/// Grammar questions for every pattern at `level`, one per answer span.
///
/// Overlapping candidate spans within a sentence keep the longest; equal
/// lengths go to the pattern listed first in the registry.
pub fn generate_grammar(
    article: &AnnotatedArticle,
    level: Level,
    registry: &Registry,
) -> Result<GrammarBatch, GrammarError> {
    let mut batch = GrammarBatch::default();
    for (si, sentence) in article.sentences.iter().enumerate() {
        let tree = IndexedTree::new(&sentence.parse);
        let mut candidates = Vec::new();
        for (order, pattern) in registry.at_level(level) {
            for inst in find_in(pattern, &tree)? {
                match build_question(pattern, &article.id, si, sentence, &inst)? {
                    Ok(question) => candidates.push(Candidate {
                        order,
                        span: inst.answer_span,
                        question,
                    }),
                    Err(reason) => batch.discarded.push(Discarded {
                        pattern: pattern.id.clone(),
                        sentence: si,
                        answer: sentence.span_text(inst.answer_span).to_string(),
                        reason,
                    }),
                }
            }
        }
        candidates.sort_by_key(|c| (std::cmp::Reverse(c.span.len()), c.order, c.span.start));
        let mut kept: Vec<Candidate> = Vec::new();
        for c in candidates {
            if let Some(winner) = kept.iter().find(|k| k.span.overlaps(&c.span)) {
                batch.discarded.push(Discarded {
                    pattern: c.question.concept.clone(),
                    sentence: si,
                    answer: c.question.answer.clone(),
                    reason: format!("overlaps the answer span of {}", winner.question.concept),
                });
            } else {
                kept.push(c);
            }
        }
        kept.sort_by_key(|c| (c.span.start, c.order));
        batch.questions.extend(kept.into_iter().map(|c| c.question));
    }
    Ok(batch)
}

/// Per-pattern calibration outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Calibration {
    pub pattern: String,
    /// Distinct answer spans found per grade (index 0 is grade 1).
    pub matches: [u64; 6],
    pub difficulty: Level,
    /// True when the pattern never matched and kept its fallback level.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CalibrationReport {
    pub sentences: [u64; 6],
    pub patterns: Vec<Calibration>,
}

/// Sets each pattern's difficulty to the grade where it occurs at the
/// highest rate per sentence. Ties go to the lower grade.
pub fn calibrate_difficulty(
    registry: &Registry,
    corpus: &[AnnotatedArticle],
) -> Result<(Registry, CalibrationReport), GrammarError> {
    let mut sentences = [0u64; 6];
    for article in corpus {
        let grade = article
            .grade
            .ok_or_else(|| GrammarError::UngradedArticle(article.id.clone()))?;
        sentences[grade.index()] += article.sentences.len() as u64;
    }
    if let Some(g) = Level::all().find(|g| sentences[g.index()] == 0) {
        return Err(GrammarError::EmptyGrade(g));
    }
    let mut counts = vec![[0u64; 6]; registry.patterns.len()];
    for article in corpus {
        let g = article.grade.expect("checked above").index();
        for sentence in &article.sentences {
            let tree = IndexedTree::new(&sentence.parse);
            for (pi, pattern) in registry.patterns.iter().enumerate() {
                counts[pi][g] += find_in(pattern, &tree)?.len() as u64;
            }
        }
    }
    let mut out = registry.clone();
    let mut report = CalibrationReport {
        sentences,
        patterns: Vec::with_capacity(registry.patterns.len()),
    };
    for (pattern, matches) in out.patterns.iter_mut().zip(counts) {
        let mut best: Option<usize> = None;
        for g in 0..6 {
            if matches[g] == 0 {
                continue;
            }
            // rate comparison by cross-multiplication keeps it exact
            let better = match best {
                None => true,
                Some(b) => matches[g] * sentences[b] > matches[b] * sentences[g],
            };
            if better {
                best = Some(g);
            }
        }
        let (difficulty, fallback) = match best {
            Some(g) => (Level::new(g as u8 + 1).expect("0..6"), false),
            None => (pattern.fallback_difficulty, true),
        };
        pattern.difficulty = difficulty;
        report.patterns.push(Calibration {
            pattern: pattern.id.clone(),
            matches,
            difficulty,
            fallback,
        });
    }
    Ok((out, report))
}

/// Result of running one pattern against its own example sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfTestOutcome {
    pub pattern: String,
    pub answer: String,
    pub distractors: [String; 3],
}

/// Checks that every pattern matches its example exactly once and yields
/// three distinct distractors that differ from the answer.
pub fn self_test(registry: &Registry) -> Result<Vec<SelfTestOutcome>, GrammarError> {
    let mut out = Vec::with_capacity(registry.patterns.len());
    for pattern in &registry.patterns {
        let fail = |message: String| GrammarError::SelfTest {
            pattern: pattern.id.clone(),
            message,
        };
        let sentence = pattern.example_sentence()?;
        let instances = find_instances(pattern, &sentence)?;
        if instances.len() != 1 {
            return Err(fail(format!("expected one match, found {}", instances.len())));
        }
        let question = build_question(pattern, "self-test", 0, &sentence, &instances[0])?
            .map_err(fail)?;
        out.push(SelfTestOutcome {
            pattern: pattern.id.clone(),
            answer: question.answer,
            distractors: question.distractors,
        });
    }
    Ok(out)
}
