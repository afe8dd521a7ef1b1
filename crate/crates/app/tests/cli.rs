use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn qgen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgen"))
        .current_dir(root())
        .args(args)
        .env_remove("QG_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const HALLOWEEN: [&str; 6] = [
    "--articles",
    "fixtures/articles",
    "--lexicon",
    "fixtures/lexicon.tsv",
    "--registry",
    "fixtures/grammar.toml",
];

#[test]
fn usage_errors_exit_64() {
    for args in [&["frobnicate"][..], &["generate", "--bogus"], &["simulate", "--config", "x.toml"], &[]] {
        let o = qgen(args);
        assert_eq!(o.status.code(), Some(64), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("Usage"), "{args:?}");
    }
    assert_eq!(qgen(&["--help"]).status.code(), Some(0));
}

#[test]
fn ingest_validates_and_stores() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("store");
    let mut args = vec!["ingest"];
    args.extend(HALLOWEEN);
    args.extend(["--store", store.to_str().unwrap()]);
    let o = qgen(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("1 articles"), "{}", stdout(&o));
    assert!(store.join("articles/halloween.json").is_file());
    assert!(store.join("lexicon.tsv").is_file());
    assert!(store.join("grammar.toml").is_file());
}

#[test]
fn ingest_of_malformed_bundle_names_the_field() {
    let o = qgen(&[
        "ingest",
        "--articles",
        "fixtures/invalid/articles",
        "--lexicon",
        "fixtures/lexicon.tsv",
        "--registry",
        "fixtures/grammar.toml",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("chains[0].mentions[1]"), "{}", stderr(&o));
}

#[test]
fn missing_inputs_are_io_errors() {
    let o = qgen(&[
        "ingest",
        "--articles",
        "fixtures/articles",
        "--lexicon",
        "fixtures/no-such.tsv",
        "--registry",
        "fixtures/grammar.toml",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = qgen(&["bank", "stats", "--bank", "no/such/bank.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qgen(&["simulate", "--config", "no-such.toml", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generate_then_bank_stats() {
    let dir = tempfile::tempdir().unwrap();
    let bank = dir.path().join("bank.jsonl");
    let report = dir.path().join("report.json");
    let mut args = vec!["generate"];
    args.extend(HALLOWEEN);
    args.extend(["--out", bank.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    let o = qgen(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("vocabulary"), "{}", stdout(&o));
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["articles"][0]["article"], "halloween");

    let o = qgen(&["bank", "stats", "--bank", bank.to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let total: u64 = ["vocabulary", "grammar", "reading"]
        .iter()
        .flat_map(|q| stats["counts"][q].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()))
        .sum();
    let lines = std::fs::read_to_string(&bank).unwrap().lines().count() as u64;
    assert_eq!(total, lines);

    let corrupt = dir.path().join("corrupt.jsonl");
    std::fs::write(&corrupt, "{\"id\": 1}\n").unwrap();
    let o = qgen(&["bank", "stats", "--bank", corrupt.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn calibrate_writes_a_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("calibrated.toml");
    let o = qgen(&[
        "calibrate",
        "--corpus",
        "fixtures/textbook",
        "--registry",
        "fixtures/grammar.toml",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("present-perfect"));
    let reg = qgen_core::grammargen::Registry::load(&out).unwrap();
    assert_eq!(reg.get("passive").unwrap().difficulty.get(), 5);

    // an ungraded corpus cannot calibrate
    let o = qgen(&["calibrate", "--corpus", "fixtures/articles", "--registry", "fixtures/grammar.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_small_config_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "learners = 12\nactivities = 3\nbootstrap_resamples = 50\n[[group]]\nname = \"proposed\"\n[[group]]\nname = \"control\"\nquiz = { selection = \"uniform-control\" }\n",
    )
    .unwrap();
    let run = || qgen(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "3", "--json-stdout"]);
    let (a, b) = (run(), run());
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["groups"].as_array().unwrap().len(), 2);
    assert_eq!(report["seed"], 3);

    let other = qgen(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "4", "--json-stdout"]);
    assert_ne!(other.stdout, a.stdout);

    std::fs::write(&cfg, "learners = 12\n[[group]]\nname = \"g\"\nquiz = { weights = { history = -1.0, fit = 1.0, challenging = 1.0 } }\n").unwrap();
    let bad = qgen(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("group[0].quiz"), "{}", stderr(&bad));
}

#[test]
fn serve_rejects_a_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("svc.toml");
    std::fs::write(&cfg, "master_seed = 1\nportt = 9\n").unwrap();
    let o = qgen(&["serve", "--config", cfg.to_str().unwrap(), "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("portt"), "{}", stderr(&o));
}
