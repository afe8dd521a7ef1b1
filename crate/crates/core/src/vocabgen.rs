//! Vocabulary cloze questions graded by the word list.
//!
//! Distractors come from the same level and POS class as the target and are
//! ranked by length difference, then edit distance, then spelling. Ranking
//! compares lexicon (lemma) forms; the chosen words are then inflected to
//! match the target as it appears in the sentence.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::corpus::{levenshtein, AnnotatedArticle, GradedLexicon, Level, PosClass, Sentence, Token};
use crate::grammargen::{inflect, pluralize, VerbForm};
use crate::question::{McQuestion, SourceRef, BLANK};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("insufficient distractor candidates: found {found}, needed {needed}")]
    InsufficientCandidates { found: usize, needed: usize },
    #[error("{word:?} ({pos}) is not in the lexicon")]
    NotListed { word: String, pos: PosClass },
}

pub fn vocab_stem(blanked: &str) -> String {
    format!("In the sentence \"{blanked}\", the blank can be:")
}

/// Ranking key of a candidate against a target word.
pub fn rank_key(candidate: &str, target: &str) -> (usize, usize, String) {
    let dlen = candidate.chars().count().abs_diff(target.chars().count());
    (dlen, levenshtein(candidate, target), candidate.to_string())
}

/// The `k` closest same-level, same-class words to `target`, in lexicon form.
///
/// `excluded` holds lowercased words that must not be offered (the target's
/// own forms and everything else in its sentence).
pub fn select_distractors(
    target: &str,
    pos: PosClass,
    level: Level,
    excluded: &HashSet<String>,
    lexicon: &GradedLexicon,
    k: usize,
) -> Result<Vec<String>, VocabError> {
    let target = target.to_lowercase();
    let mut pool: Vec<(usize, usize, String)> = lexicon
        .words_at(level, pos)
        .filter(|w| *w != target && !excluded.contains(*w))
        .map(|w| rank_key(w, &target))
        .collect();
    if pool.len() < k {
        return Err(VocabError::InsufficientCandidates {
            found: pool.len(),
            needed: k,
        });
    }
    pool.sort();
    Ok(pool.into_iter().take(k).map(|(_, _, w)| w).collect())
}

/// A lexicon word surfaced in the same inflection as `like`.
pub fn match_inflection(word: &str, like: &Token) -> String {
    let surface = match PosClass::from_penn(&like.pos) {
        PosClass::Verb => match VerbForm::from_penn(&like.pos) {
            Some(form) => inflect(word, form),
            None => word.to_string(),
        },
        PosClass::Noun if like.pos.ends_with('S') => pluralize(word),
        _ => word.to_string(),
    };
    if like.text.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = surface.chars();
        match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => surface,
        }
    } else {
        surface
    }
}

/// Lowercased surface forms and lemmas of every token in the sentence.
pub fn sentence_words(sentence: &Sentence) -> HashSet<String> {
    sentence
        .tokens
        .iter()
        .flat_map(|t| [t.text.to_lowercase(), t.lemma.to_lowercase()])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedTarget {
    pub word: String,
    pub sentence: usize,
    pub token: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct VocabBatch {
    pub questions: Vec<McQuestion>,
    pub skipped: Vec<SkippedTarget>,
    /// Concepts whose distractors were not screened for synonyms of the answer.
    pub needs_synonym_review: Vec<String>,
}

/// The lexicon key a token was found under: its lemma if listed, else its surface.
fn listed_form(token: &Token, lexicon: &GradedLexicon) -> Option<(String, Level)> {
    let pos = PosClass::from_penn(&token.pos);
    if let Some(level) = lexicon.lookup_level(&token.lemma, pos) {
        return Some((token.lemma.to_lowercase(), level));
    }
    lexicon
        .lookup_level(&token.text, pos)
        .map(|level| (token.text.to_lowercase(), level))
}

/// One question per content lemma at `level`, first occurrence wins.
pub fn generate_vocab(article: &AnnotatedArticle, level: Level, lexicon: &GradedLexicon) -> VocabBatch {
    let mut batch = VocabBatch::default();
    let mut seen: BTreeSet<(String, PosClass)> = BTreeSet::new();
    for (si, sentence) in article.sentences.iter().enumerate() {
        let excluded = sentence_words(sentence);
        for token in &sentence.tokens {
            let pos = PosClass::from_penn(&token.pos);
            if !pos.is_content() {
                continue;
            }
            let Some((form, found)) = listed_form(token, lexicon) else {
                continue;
            };
            if found != level || !seen.insert((form.clone(), pos)) {
                continue;
            }
            match select_distractors(&form, pos, level, &excluded, lexicon, 3) {
                Ok(words) => {
                    let distractors: Vec<String> =
                        words.iter().map(|w| match_inflection(w, token)).collect();
                    let span = crate::corpus::TokenSpan::single(token.index);
                    let question = McQuestion {
                        stem: vocab_stem(&sentence.replace_span(span, BLANK)),
                        answer: token.text.clone(),
                        distractors: distractors.try_into().expect("k = 3"),
                        difficulty: level,
                        concept: form.clone(),
                        source: SourceRef {
                            article: article.id.clone(),
                            sentence: Some(si),
                            token: Some(token.index),
                        },
                    };
                    if question.options_distinct() {
                        batch.needs_synonym_review.push(form);
                        batch.questions.push(question);
                    } else {
                        batch.skipped.push(SkippedTarget {
                            word: token.text.clone(),
                            sentence: si,
                            token: token.index,
                            reason: "inflected distractors collide".into(),
                        });
                    }
                }
                Err(e) => batch.skipped.push(SkippedTarget {
                    word: token.text.clone(),
                    sentence: si,
                    token: token.index,
                    reason: e.to_string(),
                }),
            }
        }
    }
    batch
}
