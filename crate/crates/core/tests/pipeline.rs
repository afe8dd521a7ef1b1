use std::path::PathBuf;

use qgen_core::corpus::{load_article_file, load_articles_dir, GradedLexicon, Level};
use qgen_core::grammargen::{calibrate_difficulty, Registry};
use qgen_core::pipeline::generate_bank;
use qgen_core::question::{normalize, QType};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn registry() -> Registry {
    Registry::load(fixtures().join("grammar.toml")).unwrap()
}

#[test]
fn textbook_calibration_recovers_grades() {
    let corpus = load_articles_dir(fixtures().join("textbook")).unwrap();
    assert_eq!(corpus.len(), 6);
    let (calibrated, report) = calibrate_difficulty(&registry(), &corpus).unwrap();
    assert_eq!(report.sentences, [6; 6]);
    let expected = [
        ("present-perfect", 1),
        ("modal-base", 1),
        ("too-adj-to", 2),
        ("present-progressive", 2),
        ("prep-ving", 3),
        ("want-to", 3),
        ("gerund-object", 4),
        ("past-perfect", 4),
        ("passive", 5),
        ("remember-to", 6),
    ];
    for (id, grade) in expected {
        let c = report.patterns.iter().find(|c| c.pattern == id).unwrap();
        assert!(!c.fallback, "{id} fell back");
        assert_eq!(c.difficulty.get(), grade, "{id}: {:?}", c.matches);
        assert_eq!(calibrated.get(id).unwrap().difficulty.get(), grade);
    }
    // secondary occurrences at lower rates do not win
    let pp = report.patterns.iter().find(|c| c.pattern == "present-perfect").unwrap();
    assert_eq!(pp.matches, [2, 1, 0, 0, 1, 0]);
}

#[test]
fn halloween_bank_holds_the_worked_examples() {
    let article = load_article_file(fixtures().join("articles/halloween.json")).unwrap();
    let lexicon = GradedLexicon::load(fixtures().join("lexicon.tsv")).unwrap();
    let (bank, report) = generate_bank(&[article], &lexicon, &registry()).unwrap();
    assert_eq!(report.stats.total(), bank.len());
    let has = |qtype: QType, answer: &str, options: &[&str]| {
        bank.items().iter().any(|i| {
            let mut want: Vec<String> = options.iter().map(|s| normalize(s)).collect();
            want.sort();
            let mut got: Vec<String> = i.options.iter().map(|s| normalize(s)).collect();
            got.sort();
            i.qtype == qtype && i.answer() == answer && got == want
        })
    };
    assert!(has(
        QType::Vocabulary,
        "associated",
        &["associated", "contributed", "distributed", "illustrated"]
    ));
    assert!(has(
        QType::Grammar,
        "have developed",
        &["develop", "have developed", "have developing", "is developed"]
    ));
    assert!(has(QType::Reading, "Jack", &["Jack", "devil", "ghost", "witch"]));
    assert!(bank
        .items()
        .iter()
        .any(|i| i.answer() == "Jack was so stingy that he could not enter heaven when he died."));
    let a = &report.articles[0];
    assert_eq!(a.overall, 1);
    assert!(a.vocabulary > 0 && a.grammar > 0 && a.independent > 0);
    assert!(bank.items().iter().all(|i| i.difficulty >= Level::MIN));
}

#[test]
fn generation_is_deterministic() {
    let article = load_article_file(fixtures().join("articles/halloween.json")).unwrap();
    let lexicon = GradedLexicon::load(fixtures().join("lexicon.tsv")).unwrap();
    let a = generate_bank(std::slice::from_ref(&article), &lexicon, &registry()).unwrap().0;
    let b = generate_bank(&[article], &lexicon, &registry()).unwrap().0;
    assert_eq!(a.to_jsonl(), b.to_jsonl());
}

#[test]
fn malformed_bundle_names_the_field() {
    let err = load_articles_dir(fixtures().join("invalid/articles")).unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("chains[0].mentions[1]"), "{err}");
}
