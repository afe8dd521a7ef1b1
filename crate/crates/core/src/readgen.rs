//! Referential reading questions built from coreference chains, and the
//! article-level readability estimate that sets their difficulty.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedArticle, GradedLexicon, Level, Mention, MentionKind, PosClass, TokenSpan};
use crate::question::{McQuestion, SourceRef};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReadError {
    #[error("article {0:?} has no sentences")]
    EmptyArticle(String),
    #[error("not enough material for an overall question: {found_sentences} usable sentences")]
    NotEnoughMaterial { found_sentences: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadabilityScore {
    pub level: Level,
    pub lexical_component: Level,
    pub syntactic_component: Level,
}

/// Pluggable article difficulty estimate.
pub trait ReadabilityScorer {
    fn score(&self, article: &AnnotatedArticle, lexicon: &GradedLexicon) -> Result<ReadabilityScore, ReadError>;
}

/// Lexical coverage plus mean sentence length.
///
/// The lexical part is the lowest level covering `coverage` of the listed
/// content tokens. The syntactic part buckets mean tokens per sentence at
/// `length_buckets` (upper bounds for levels 1 to 5; longer is level 6).
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicScorer {
    pub coverage: f64,
    pub length_buckets: [f64; 5],
}

impl Default for HeuristicScorer {
    fn default() -> Self {
        HeuristicScorer {
            coverage: 0.9,
            length_buckets: [8.0, 12.0, 16.0, 20.0, 25.0],
        }
    }
}

impl ReadabilityScorer for HeuristicScorer {
    fn score(&self, article: &AnnotatedArticle, lexicon: &GradedLexicon) -> Result<ReadabilityScore, ReadError> {
        if article.sentences.is_empty() {
            return Err(ReadError::EmptyArticle(article.id.clone()));
        }
        let mut per_level = [0usize; 6];
        let mut tokens = 0usize;
        for sentence in &article.sentences {
            tokens += sentence.len();
            for token in &sentence.tokens {
                if !PosClass::from_penn(&token.pos).is_content() {
                    continue;
                }
                if let Some(level) = lexicon.lookup_token(token) {
                    per_level[level.index()] += 1;
                }
            }
        }
        let listed: usize = per_level.iter().sum();
        let mut lexical = Level::MAX;
        let mut covered = 0usize;
        for level in Level::all() {
            covered += per_level[level.index()];
            if listed == 0 || covered as f64 >= self.coverage * listed as f64 {
                lexical = level;
                break;
            }
        }
        let mean = tokens as f64 / article.sentences.len() as f64;
        let bucket = self
            .length_buckets
            .iter()
            .position(|&bound| mean <= bound)
            .unwrap_or(5);
        let syntactic = Level::new(bucket as u8 + 1).expect("bucket in 0..6");
        Ok(ReadabilityScore {
            level: lexical.max(syntactic),
            lexical_component: lexical,
            syntactic_component: syntactic,
        })
    }
}

pub fn estimate_reading_level(article: &AnnotatedArticle, lexicon: &GradedLexicon) -> Result<ReadabilityScore, ReadError> {
    HeuristicScorer::default().score(article, lexicon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefSubtype {
    Independent,
    Overall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefQuestion {
    pub subtype: RefSubtype,
    pub question: McQuestion,
}

pub const OVERALL_STEM: &str = "Which of the following statements is TRUE?";

pub fn independent_stem(word: &str, sentence: &str) -> String {
    format!("The word \"{word}\" in this sentence \"{sentence}\" refer to:")
}

pub fn independent_concept(article: &str, chain: &str) -> String {
    format!("{article}#{chain}")
}

pub fn overall_concept(article: &str) -> String {
    format!("{article}#overall")
}

/// A mention reached through the article, with its chain index.
#[derive(Clone, Copy)]
struct At<'a> {
    chain: usize,
    order: usize,
    mention: &'a Mention,
}

fn all_mentions(article: &AnnotatedArticle) -> Vec<At<'_>> {
    let mut out: Vec<At<'_>> = article
        .mentions()
        .map(|(chain, mention)| At { chain, order: 0, mention })
        .collect();
    out.sort_by_key(|a| (a.mention.position(), a.chain));
    for (i, a) in out.iter_mut().enumerate() {
        a.order = i;
    }
    out
}

fn head_text<'a>(article: &'a AnnotatedArticle, m: &Mention) -> &'a str {
    &article.head_token(m).text
}

/// Head surface as it would read mid-sentence.
fn head_surface(article: &AnnotatedArticle, m: &Mention) -> String {
    let text = head_text(article, m);
    let sentence = &article.sentences[m.sentence_index];
    if m.kind == MentionKind::Common && sentence.is_initial(TokenSpan::single(m.head_index)) {
        text.to_lowercase()
    } else {
        text.to_string()
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Nearest non-pronoun coreferent: preceding first, else following.
fn antecedent<'a>(chain: &'a [Mention], target: &Mention) -> Option<&'a Mention> {
    let before = chain
        .iter()
        .filter(|m| !m.is_pronoun() && m.position() < target.position())
        .max_by_key(|m| m.position());
    before.or_else(|| {
        chain
            .iter()
            .filter(|m| !m.is_pronoun() && m.position() > target.position())
            .min_by_key(|m| m.position())
    })
}

fn agrees(a: &Mention, b: &Mention) -> bool {
    a.number.agrees(b.number) && a.gender.agrees(b.gender)
}

/// Why a mention did not yield a question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedMention {
    pub chain: String,
    pub sentence: usize,
    pub token: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct RefBatch {
    pub questions: Vec<RefQuestion>,
    pub skipped: Vec<SkippedMention>,
}

/// One "what does this word refer to" question per eligible mention.
pub fn gen_independent(article: &AnnotatedArticle, level: Level) -> RefBatch {
    let mentions = all_mentions(article);
    let mut batch = RefBatch::default();
    for (ci, chain) in article.chains.iter().enumerate() {
        if chain.mentions.len() < 2 || chain.mentions.iter().all(Mention::is_pronoun) {
            continue;
        }
        for target in &chain.mentions {
            let skip = |reason: &str| SkippedMention {
                chain: chain.id.clone(),
                sentence: target.sentence_index,
                token: target.head_index,
                reason: reason.to_string(),
            };
            let Some(answer_m) = antecedent(&chain.mentions, target) else {
                batch.skipped.push(skip("no other non-pronoun mention in chain"));
                continue;
            };
            let word = head_text(article, target);
            let answer = head_surface(article, answer_m);
            if answer.eq_ignore_ascii_case(word) {
                batch.skipped.push(skip("answer repeats the target word"));
                continue;
            }
            let mut pool: Vec<&At<'_>> = mentions
                .iter()
                .filter(|a| a.chain != ci && !a.mention.is_pronoun() && agrees(a.mention, answer_m))
                .collect();
            pool.sort_by_key(|a| (a.mention.sentence_index.abs_diff(target.sentence_index), a.order));
            let mut seen: HashSet<String> = [answer.to_lowercase(), word.to_lowercase()].into();
            let mut distractors = Vec::with_capacity(3);
            for a in pool {
                let surface = head_surface(article, a.mention);
                if seen.insert(surface.to_lowercase()) {
                    distractors.push(surface);
                    if distractors.len() == 3 {
                        break;
                    }
                }
            }
            let Ok(distractors) = <[String; 3]>::try_from(distractors) else {
                batch.skipped.push(skip("fewer than 3 agreeing mentions in other chains"));
                continue;
            };
            let sentence = &article.sentences[target.sentence_index];
            batch.questions.push(RefQuestion {
                subtype: RefSubtype::Independent,
                question: McQuestion {
                    stem: independent_stem(word, &sentence.text),
                    answer,
                    distractors,
                    difficulty: level,
                    concept: independent_concept(&article.id, &chain.id),
                    source: SourceRef {
                        article: article.id.clone(),
                        sentence: Some(target.sentence_index),
                        token: Some(target.head_index),
                    },
                },
            });
        }
    }
    batch
}

fn is_possessive(article: &AnnotatedArticle, m: &Mention) -> bool {
    article.head_token(m).pos.ends_with('$')
}

/// Sentence text with the head of `target` replaced by `replacement`'s head.
fn substitute(article: &AnnotatedArticle, target: &Mention, replacement: &Mention) -> String {
    let sentence = &article.sentences[target.sentence_index];
    let span = TokenSpan::single(target.head_index);
    let mut word = head_surface(article, replacement);
    if sentence.is_initial(span) {
        word = capitalize(&word);
    }
    sentence.replace_span(span, &word)
}

/// Nearest non-coreferent mention that could stand in for `target` grammatically.
fn false_replacement<'a>(
    article: &AnnotatedArticle,
    mentions: &[At<'a>],
    target: &At<'_>,
) -> Option<&'a Mention> {
    let word = head_text(article, target.mention).to_lowercase();
    mentions
        .iter()
        .filter(|a| {
            a.chain != target.chain
                && !a.mention.is_pronoun()
                && (target.mention.is_pronoun() || a.mention.kind == target.mention.kind)
                && agrees(a.mention, target.mention)
                && head_text(article, a.mention).to_lowercase() != word
        })
        .min_by_key(|a| (a.mention.sentence_index.abs_diff(target.mention.sentence_index), a.order))
        .map(|a| a.mention)
}

/// One "which statement is true" question per article.
///
/// The true choice replaces a pronoun of the longest chain that refers back
/// across a sentence boundary by its antecedent. Each false choice comes from
/// another sentence, nearest first (later sentences win ties), where one
/// mention is replaced by a compatible mention of a different entity.
pub fn gen_overall(article: &AnnotatedArticle, level: Level) -> Result<RefQuestion, ReadError> {
    let usable: HashSet<usize> = article.mentions().map(|(_, m)| m.sentence_index).collect();
    let not_enough = || ReadError::NotEnoughMaterial {
        found_sentences: usable.len(),
    };
    if usable.len() < 4 || article.chains.len() < 2 {
        return Err(not_enough());
    }
    let mentions = all_mentions(article);

    let mut by_size: Vec<usize> = (0..article.chains.len()).collect();
    by_size.sort_by_key(|&c| std::cmp::Reverse(article.chains[c].mentions.len()));
    let mut truth: Option<(&Mention, String)> = None;
    'chains: for c in by_size {
        let chain = &article.chains[c].mentions;
        for m in chain.iter().filter(|m| m.is_pronoun() && !is_possessive(article, m)) {
            let Some(ante) = chain
                .iter()
                .filter(|a| !a.is_pronoun() && a.position() < m.position())
                .max_by_key(|a| a.position())
            else {
                continue;
            };
            if ante.sentence_index < m.sentence_index {
                truth = Some((m, substitute(article, m, ante)));
                break 'chains;
            }
        }
    }
    let (true_m, answer) = truth.ok_or_else(not_enough)?;
    let home = true_m.sentence_index;

    let mut others: Vec<usize> = usable.iter().copied().filter(|&s| s != home).collect();
    others.sort_by_key(|&s| (s.abs_diff(home), s < home, s));
    let mut distractors = Vec::with_capacity(3);
    for s in others {
        let mut targets: Vec<&At<'_>> = mentions
            .iter()
            .filter(|a| a.mention.sentence_index == s && !is_possessive(article, a.mention))
            .collect();
        targets.sort_by_key(|a| (a.mention.is_pronoun(), a.order));
        for t in targets {
            if let Some(r) = false_replacement(article, &mentions, t) {
                let text = substitute(article, t.mention, r);
                if text != answer && !distractors.contains(&text) {
                    distractors.push(text);
                    break;
                }
            }
        }
        if distractors.len() == 3 {
            break;
        }
    }
    let distractors: [String; 3] = distractors.try_into().map_err(|_| not_enough())?;
    Ok(RefQuestion {
        subtype: RefSubtype::Overall,
        question: McQuestion {
            stem: OVERALL_STEM.to_string(),
            answer,
            distractors,
            difficulty: level,
            concept: overall_concept(&article.id),
            source: SourceRef {
                article: article.id.clone(),
                sentence: Some(home),
                token: Some(true_m.head_index),
            },
        },
    })
}
