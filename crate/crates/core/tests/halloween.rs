use std::path::PathBuf;

use qgen_core::corpus::{load_article_file, AnnotatedArticle, GradedLexicon, Level};
use qgen_core::grammargen::{self, generate_grammar, Registry};
use qgen_core::question::normalize;
use qgen_core::readgen::{estimate_reading_level, gen_independent, gen_overall};
use qgen_core::vocabgen::generate_vocab;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn halloween() -> AnnotatedArticle {
    load_article_file(fixtures().join("articles/halloween.json")).unwrap()
}

fn lexicon() -> GradedLexicon {
    GradedLexicon::load(fixtures().join("lexicon.tsv")).unwrap()
}

fn registry() -> Registry {
    Registry::load(fixtures().join("grammar.toml")).unwrap()
}

fn sorted(items: &[String]) -> Vec<String> {
    let mut v: Vec<String> = items.iter().map(|s| normalize(s)).collect();
    v.sort();
    v
}

#[test]
fn jack_chain_and_devil_are_annotated() {
    let article = halloween();
    let jack = article.chains.iter().find(|c| c.id == "jack").unwrap();
    let heads: Vec<&str> = jack.mentions.iter().map(|m| article.head_token(m).text.as_str()).collect();
    assert_eq!(&heads[..5], ["man", "Jack", "He", "he", "he"]);
    assert!(article
        .mentions()
        .any(|(_, m)| article.head_token(m).text == "devil"));
}

#[test]
fn vocabulary_question_one() {
    let article = halloween();
    let batch = generate_vocab(&article, Level::new(4).unwrap(), &lexicon());
    let q = batch.questions.iter().find(|q| q.answer == "associated").unwrap();
    assert_eq!(
        q.stem,
        "In the sentence \"It is _____ with ghosts, skeletons, witches, and other scary images.\", the blank can be:"
    );
    assert_eq!(sorted(&q.distractors), ["contributed", "distributed", "illustrated"]);
    assert_eq!(q.distractors[0], "distributed");
}

#[test]
fn grammar_question_two() {
    let article = halloween();
    let reg = registry();
    let level = reg.get("present-perfect").unwrap().difficulty;
    let batch = generate_grammar(&article, level, &reg).unwrap();
    let q = batch.questions.iter().find(|q| q.concept == "present-perfect").unwrap();
    assert_eq!(q.answer, "have developed");
    assert_eq!(
        q.stem,
        "In the Sentence, \"Many of the original Halloween traditions _____ today into fun activities for children.\", the blank can be filled in:"
    );
    assert_eq!(sorted(&q.distractors), ["develop", "have developing", "is developed"]);
}

#[test]
fn reading_question_three() {
    let article = halloween();
    let batch = gen_independent(&article, Level::new(3).unwrap());
    let q = batch
        .questions
        .iter()
        .map(|r| &r.question)
        .find(|q| q.source.sentence == Some(12) && q.stem.contains("\"he\""))
        .unwrap();
    assert_eq!(q.answer, "Jack");
    assert_eq!(sorted(&q.distractors), ["devil", "ghost", "witch"]);
}

#[test]
fn reading_question_four() {
    let article = halloween();
    let q = gen_overall(&article, Level::new(3).unwrap()).unwrap().question;
    assert_eq!(q.answer, "Jack was so stingy that he could not enter heaven when he died.");
    assert!(q
        .distractors
        .iter()
        .any(|d| d.ends_with("played a trick on the witch.")));
    assert!(q.options_distinct());
}

#[test]
fn registry_self_test_passes() {
    let outcomes = grammargen::self_test(&registry()).unwrap();
    assert_eq!(outcomes.len(), registry().patterns.len());
    let pp = outcomes.iter().find(|o| o.pattern == "present-perfect").unwrap();
    assert_eq!(pp.answer, "has grown");
}

#[test]
fn readability_is_defined_for_the_fixture() {
    let score = estimate_reading_level(&halloween(), &lexicon()).unwrap();
    assert_eq!(score.level, score.lexical_component.max(score.syntactic_component));
}
