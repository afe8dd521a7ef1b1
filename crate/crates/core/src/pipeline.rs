//! Article-to-bank generation: runs every generator over every article and
//! collects the items with a per-type, per-level report.

use serde::Serialize;

use crate::corpus::{AnnotatedArticle, GradedLexicon, Level};
use crate::grammargen::{generate_grammar, GrammarError, Registry};
use crate::question::QType;
use crate::quizengine::{BankError, BankStats, Item, ItemBank};
use crate::readgen::{estimate_reading_level, gen_independent, gen_overall, ReadError};

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error(transparent)]
    Bank(#[from] BankError),
}

/// What one article contributed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArticleReport {
    pub article: String,
    pub reading_level: Level,
    pub vocabulary: usize,
    pub grammar: usize,
    pub independent: usize,
    pub overall: usize,
    pub vocabulary_skipped: usize,
    pub grammar_discarded: usize,
    pub mentions_skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overall_skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationReport {
    pub articles: Vec<ArticleReport>,
    pub stats: BankStats,
    /// Vocabulary concepts whose distractors were not screened for synonyms.
    pub needs_synonym_review: Vec<String>,
    /// Questions identical to an earlier one (same stem and options), dropped.
    pub duplicates: usize,
}

impl GenerationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for a in &self.articles {
            out.push_str(&format!(
                "{}: reading level {}, {} vocabulary, {} grammar, {} independent, {} overall\n",
                a.article, a.reading_level, a.vocabulary, a.grammar, a.independent, a.overall
            ));
        }
        out.push('\n');
        out.push_str(&self.stats.render());
        if !self.needs_synonym_review.is_empty() {
            out.push_str(&format!(
                "\n{} vocabulary items need a manual synonym check\n",
                self.needs_synonym_review.len()
            ));
        }
        out
    }
}

/// Vocabulary and grammar at every level, reading questions at the
/// article's estimated reading level.
pub fn generate_bank(
    articles: &[AnnotatedArticle],
    lexicon: &GradedLexicon,
    registry: &Registry,
) -> Result<(ItemBank, GenerationReport), GenerateError> {
    let mut items = Vec::new();
    let mut reports = Vec::with_capacity(articles.len());
    let mut review = Vec::new();
    for article in articles {
        let reading_level = estimate_reading_level(article, lexicon)?.level;
        let mut report = ArticleReport {
            article: article.id.clone(),
            reading_level,
            vocabulary: 0,
            grammar: 0,
            independent: 0,
            overall: 0,
            vocabulary_skipped: 0,
            grammar_discarded: 0,
            mentions_skipped: 0,
            overall_skipped: None,
        };
        for level in Level::all() {
            let vocab = crate::vocabgen::generate_vocab(article, level, lexicon);
            report.vocabulary += vocab.questions.len();
            report.vocabulary_skipped += vocab.skipped.len();
            review.extend(vocab.needs_synonym_review);
            items.extend(vocab.questions.iter().map(|q| Item::from_question(QType::Vocabulary, q)));

            let grammar = generate_grammar(article, level, registry)?;
            report.grammar += grammar.questions.len();
            report.grammar_discarded += grammar.discarded.len();
            items.extend(grammar.questions.iter().map(|q| Item::from_question(QType::Grammar, q)));
        }
        let independent = gen_independent(article, reading_level);
        report.independent = independent.questions.len();
        report.mentions_skipped = independent.skipped.len();
        items.extend(
            independent
                .questions
                .iter()
                .map(|r| Item::from_question(QType::Reading, &r.question)),
        );
        match gen_overall(article, reading_level) {
            Ok(r) => {
                report.overall = 1;
                items.push(Item::from_question(QType::Reading, &r.question));
            }
            Err(e @ ReadError::NotEnoughMaterial { .. }) => report.overall_skipped = Some(e.to_string()),
            Err(e) => return Err(e.into()),
        }
        reports.push(report);
    }
    let mut seen = std::collections::HashSet::new();
    let before = items.len();
    items.retain(|i| seen.insert(i.id.clone()));
    let duplicates = before - items.len();
    let bank = ItemBank::new(items)?;
    review.sort();
    review.dedup();
    let report = GenerationReport {
        articles: reports,
        stats: bank.stats(),
        needs_synonym_review: review,
        duplicates,
    };
    Ok((bank, report))
}
