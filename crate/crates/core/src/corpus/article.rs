use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tree::{parse_bracketed, ParseNode, TokenSpan};
use super::{CorpusError, Level};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub lemma: String,
    pub pos: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MentionKind {
    Pronoun,
    Common,
    Proper,
}

impl MentionKind {
    /// Kind implied by a head POS tag, if the tag is nominal.
    pub fn from_head_pos(tag: &str) -> Option<MentionKind> {
        match tag {
            "PRP" | "PRP$" | "WP" | "WP$" => Some(MentionKind::Pronoun),
            "NN" | "NNS" => Some(MentionKind::Common),
            "NNP" | "NNPS" => Some(MentionKind::Proper),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Number {
    Singular,
    Plural,
    Unknown,
}

impl Number {
    /// Unknown agrees with anything.
    pub fn agrees(self, other: Number) -> bool {
        self == Number::Unknown || other == Number::Unknown || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Neutral,
    Unknown,
}

impl Gender {
    /// Unknown agrees with anything.
    pub fn agrees(self, other: Gender) -> bool {
        self == Gender::Unknown || other == Gender::Unknown || self == other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub sentence_index: usize,
    pub span: TokenSpan,
    pub head_index: usize,
    pub kind: MentionKind,
    pub number: Number,
    pub gender: Gender,
}

impl Mention {
    pub fn is_pronoun(&self) -> bool {
        self.kind == MentionKind::Pronoun
    }

    /// Document-order key.
    pub fn position(&self) -> (usize, usize) {
        (self.sentence_index, self.span.start)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefChain {
    pub id: String,
    pub mentions: Vec<Mention>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<Token>,
    pub parse: ParseNode,
    /// Byte range of each token inside `text`.
    offsets: Vec<(usize, usize)>,
}

impl Sentence {
    /// Builds a sentence, aligning tokens to the text and parse leaves to tokens.
    pub fn new(
        text: String,
        tokens: Vec<Token>,
        parse: ParseNode,
    ) -> Result<Sentence, String> {
        let leaves = parse.leaves();
        if leaves.len() != tokens.len() {
            return Err(format!(
                "parse has {} leaves but sentence has {} tokens",
                leaves.len(),
                tokens.len()
            ));
        }
        for (leaf, token) in leaves.iter().zip(&tokens) {
            if leaf.label != token.text {
                return Err(format!(
                    "parse leaf {:?} does not match token {} {:?}",
                    leaf.label, token.index, token.text
                ));
            }
        }
        let tags = parse.pos_tags();
        if tags.len() != tokens.len() {
            return Err("every leaf must sit under its own POS node".to_string());
        }
        for (tag, token) in tags.iter().zip(&tokens) {
            if *tag != token.pos {
                return Err(format!(
                    "parse tag {tag:?} does not match token {} pos {:?}",
                    token.index, token.pos
                ));
            }
        }
        let mut offsets = Vec::with_capacity(tokens.len());
        let mut cursor = 0;
        for token in &tokens {
            let rest = &text[cursor..];
            let skipped = rest.len() - rest.trim_start().len();
            let start = cursor + skipped;
            if !text[start..].starts_with(&token.text) {
                return Err(format!(
                    "token {} {:?} not found at byte {start} of sentence text",
                    token.index, token.text
                ));
            }
            let end = start + token.text.len();
            offsets.push((start, end));
            cursor = end;
        }
        if !text[cursor..].trim().is_empty() {
            return Err(format!("sentence text has untokenized tail {:?}", &text[cursor..]));
        }
        Ok(Sentence {
            text,
            tokens,
            parse,
            offsets,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn byte_range(&self, span: TokenSpan) -> (usize, usize) {
        (self.offsets[span.start].0, self.offsets[span.end].1)
    }

    /// Surface text covered by a token span, including inner whitespace.
    pub fn span_text(&self, span: TokenSpan) -> &str {
        let (a, b) = self.byte_range(span);
        &self.text[a..b]
    }

    /// Sentence text with the span replaced by `replacement`.
    pub fn replace_span(&self, span: TokenSpan, replacement: &str) -> String {
        let (a, b) = self.byte_range(span);
        format!("{}{}{}", &self.text[..a], replacement, &self.text[b..])
    }

    /// True when the span starts the sentence (ignoring leading punctuation).
    pub fn is_initial(&self, span: TokenSpan) -> bool {
        self.tokens[..span.start]
            .iter()
            .all(|t| !t.text.chars().any(char::is_alphanumeric))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedArticle {
    pub id: String,
    pub title: String,
    pub grade: Option<Level>,
    pub sentences: Vec<Sentence>,
    pub chains: Vec<CorefChain>,
}

impl AnnotatedArticle {
    pub fn token(&self, sentence: usize, index: usize) -> &Token {
        &self.sentences[sentence].tokens[index]
    }

    pub fn head_token(&self, mention: &Mention) -> &Token {
        self.token(mention.sentence_index, mention.head_index)
    }

    /// Full article text, sentences joined by single spaces.
    pub fn text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Every mention tagged with its chain index, in chain order.
    pub fn mentions(&self) -> impl Iterator<Item = (usize, &Mention)> {
        self.chains
            .iter()
            .enumerate()
            .flat_map(|(c, chain)| chain.mentions.iter().map(move |m| (c, m)))
    }
}

// Wire schema of an article bundle.

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawArticle {
    id: String,
    title: String,
    #[serde(default)]
    grade: Option<u8>,
    sentences: Vec<RawSentence>,
    #[serde(default)]
    chains: Vec<RawChain>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawSentence {
    text: String,
    tokens: Vec<RawToken>,
    parse: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawToken {
    text: String,
    lemma: String,
    pos: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    id: String,
    mentions: Vec<RawMention>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawMention {
    sentence: usize,
    start: usize,
    end: usize,
    head: usize,
    kind: MentionKind,
    number: Number,
    gender: Gender,
}

/// Parses and validates one article bundle (JSON).
pub fn load_article(document: &str) -> Result<AnnotatedArticle, CorpusError> {
    let raw: RawArticle = serde_json::from_str(document).map_err(|e| {
        CorpusError::schema(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    validate(raw)
}

pub fn load_article_file(path: impl AsRef<Path>) -> Result<AnnotatedArticle, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_article(&text).map_err(|e| match e {
        CorpusError::Schema { path: field, message } => CorpusError::Schema {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

/// Loads every `*.json` bundle in a directory, sorted by file name.
pub fn load_articles_dir(dir: impl AsRef<Path>) -> Result<Vec<AnnotatedArticle>, CorpusError> {
    let dir = dir.as_ref();
    let io_err = |source| CorpusError::Io {
        path: dir.display().to_string(),
        source,
    };
    if dir.is_file() {
        return Ok(vec![load_article_file(dir)?]);
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    paths.iter().map(load_article_file).collect()
}

fn validate(raw: RawArticle) -> Result<AnnotatedArticle, CorpusError> {
    if raw.id.trim().is_empty() {
        return Err(CorpusError::schema("id", "must be non-empty"));
    }
    let grade = match raw.grade {
        None => None,
        Some(g) => Some(
            Level::new(g).ok_or_else(|| CorpusError::schema("grade", format!("{g} not in 1..=6")))?,
        ),
    };
    if raw.sentences.is_empty() {
        return Err(CorpusError::schema("sentences", "article has no sentences"));
    }

    let mut sentences = Vec::with_capacity(raw.sentences.len());
    for (s, rs) in raw.sentences.into_iter().enumerate() {
        if rs.tokens.is_empty() {
            return Err(CorpusError::schema(format!("sentences[{s}].tokens"), "no tokens"));
        }
        let mut tokens = Vec::with_capacity(rs.tokens.len());
        for (t, rt) in rs.tokens.into_iter().enumerate() {
            if rt.text.is_empty() {
                return Err(CorpusError::schema(
                    format!("sentences[{s}].tokens[{t}].text"),
                    "token text must be non-empty",
                ));
            }
            if rt.pos.is_empty() {
                return Err(CorpusError::schema(
                    format!("sentences[{s}].tokens[{t}].pos"),
                    "POS tag must be non-empty",
                ));
            }
            tokens.push(Token {
                index: t,
                text: rt.text,
                lemma: rt.lemma,
                pos: rt.pos,
            });
        }
        let parse = parse_bracketed(&rs.parse).map_err(|source| CorpusError::Parse {
            path: format!("sentences[{s}].parse"),
            source,
        })?;
        let sentence = Sentence::new(rs.text, tokens, parse)
            .map_err(|message| CorpusError::Alignment { sentence: s, message })?;
        sentences.push(sentence);
    }

    let mut chains = Vec::with_capacity(raw.chains.len());
    let mut seen_ids = HashSet::new();
    let mut seen_mentions = HashSet::new();
    for (c, rc) in raw.chains.into_iter().enumerate() {
        let base = format!("chains[{c}]");
        if !seen_ids.insert(rc.id.clone()) {
            return Err(CorpusError::schema(format!("{base}.id"), format!("duplicate chain id {:?}", rc.id)));
        }
        if rc.mentions.is_empty() {
            return Err(CorpusError::schema(format!("{base}.mentions"), "chain has no mentions"));
        }
        let mut mentions: Vec<Mention> = Vec::with_capacity(rc.mentions.len());
        for (m, rm) in rc.mentions.into_iter().enumerate() {
            let path = format!("{base}.mentions[{m}]");
            let Some(sentence) = sentences.get(rm.sentence) else {
                return Err(CorpusError::DanglingMention {
                    path,
                    message: format!(
                        "sentence {} out of range (article has {})",
                        rm.sentence,
                        sentences.len()
                    ),
                });
            };
            if rm.start > rm.end || rm.end >= sentence.len() {
                return Err(CorpusError::DanglingMention {
                    path,
                    message: format!(
                        "token span {}..={} out of range (sentence has {} tokens)",
                        rm.start,
                        rm.end,
                        sentence.len()
                    ),
                });
            }
            let span = TokenSpan::new(rm.start, rm.end);
            if !span.contains(rm.head) {
                return Err(CorpusError::schema(
                    format!("{path}.head"),
                    format!("head {} outside span {}..={}", rm.head, rm.start, rm.end),
                ));
            }
            let head_pos = &sentence.tokens[rm.head].pos;
            match MentionKind::from_head_pos(head_pos) {
                Some(kind) if kind == rm.kind => {}
                _ => {
                    return Err(CorpusError::schema(
                        format!("{path}.kind"),
                        format!("kind {:?} inconsistent with head POS {head_pos:?}", rm.kind),
                    ))
                }
            }
            let mention = Mention {
                sentence_index: rm.sentence,
                span,
                head_index: rm.head,
                kind: rm.kind,
                number: rm.number,
                gender: rm.gender,
            };
            if let Some(prev) = mentions.last() {
                if prev.position() > mention.position() {
                    return Err(CorpusError::schema(path, "mentions not in document order"));
                }
                if prev.sentence_index == mention.sentence_index && prev.span.overlaps(&mention.span) {
                    return Err(CorpusError::schema(path, "overlaps previous mention in chain"));
                }
            }
            if !seen_mentions.insert((mention.sentence_index, mention.span)) {
                return Err(CorpusError::schema(path, "mention annotated in more than one chain"));
            }
            mentions.push(mention);
        }
        chains.push(CorefChain {
            id: rc.id,
            mentions,
        });
    }

    Ok(AnnotatedArticle {
        id: raw.id,
        title: raw.title,
        grade,
        sentences,
        chains,
    })
}
