use qgen_core::corpus::Level;
use qgen_core::question::QType;
use qgen_core::quizengine::{Bucket, Delivery, PerSkill};
use qgen_core::seed;
use qgen_core::sim::{
    bootstrap_mean_ci, run_experiment, simulate_learner, ExperimentConfig, GroupReport, LearnerModel, Materials,
    SimLearner, SyntheticBank,
};

fn delivery(difficulty: u8) -> Delivery {
    Delivery {
        item_id: "x".into(),
        qtype: QType::Grammar,
        difficulty: Level::new(difficulty).unwrap(),
        concept: "c".into(),
        bucket: Bucket::Fit,
        order: [2, 0, 3, 1],
        correct_index: 1,
    }
}

fn learner(theta: f64) -> SimLearner {
    SimLearner {
        ability: PerSkill::splat(theta),
        boosted: Default::default(),
    }
}

#[test]
fn response_probability_limits() {
    let m = LearnerModel::default();
    assert!((m.p_correct(3.0, 3.0) - 0.625).abs() < 1e-12);
    assert!((m.p_correct(1e6, 1.0) - 1.0).abs() < 1e-9);
    assert!((m.p_correct(-1e6, 1.0) - 0.25).abs() < 1e-9);
    for k in -40..=40 {
        let p = m.p_correct(k as f64 * 0.25, 3.0);
        assert!((0.25..=1.0).contains(&p));
    }
}

#[test]
fn guessing_floor() {
    let m = LearnerModel::default();
    let l = learner(-1e9);
    let mut rng = seed::rng(1);
    let d = delivery(1);
    let n = 20_000;
    let hits = (0..n).filter(|_| l.respond(&m, &d, &mut rng) == d.correct_index).count();
    let rate = hits as f64 / n as f64;
    assert!((0.235..=0.265).contains(&rate), "{rate}");
}

#[test]
fn wrong_answers_spread_over_distractors() {
    let m = LearnerModel::default();
    let l = learner(-1e9);
    let mut rng = seed::rng(2);
    let d = delivery(6);
    let mut counts = [0usize; 4];
    for _ in 0..12_000 {
        counts[l.respond(&m, &d, &mut rng)] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        assert!((2_600..=3_400).contains(c), "option {k}: {c}");
    }
}

#[test]
fn raising_ability_never_flips_a_correct_answer() {
    let m = LearnerModel::default();
    for s in 0..200 {
        for level in 1..=6 {
            let d = delivery(level);
            let low = learner(1.0 + (s % 5) as f64 * 0.5);
            let high = learner(low.ability.grammar + 0.7);
            let mut r1 = seed::rng(s);
            let mut r2 = seed::rng(s);
            for _ in 0..20 {
                let a = low.respond(&m, &d, &mut r1) == d.correct_index;
                let b = high.respond(&m, &d, &mut r2) == d.correct_index;
                assert!(!a || b);
            }
        }
    }
}

#[test]
fn growth_follows_engagement_window() {
    let m = LearnerModel::default();
    let mut l = learner(3.0);
    let engaged = l.learn(&m, &[delivery(2), delivery(3), delivery(4)]);
    assert!(engaged.grammar);
    assert!((l.ability.grammar - 3.05).abs() < 1e-12);
    let mut l = learner(3.0);
    // mean 3.67 is engaged, but the level-5 item is more than one above
    l.learn(&m, &[delivery(3), delivery(3), delivery(5)]);
    assert!((l.ability.grammar - 3.025).abs() < 1e-12);
    let mut l = learner(3.0);
    let engaged = l.learn(&m, &[delivery(1), delivery(1)]);
    assert!(!engaged.grammar);
    assert_eq!(l.ability.grammar, 3.0);
}

const SMALL: &str = r#"
learners = 40
bootstrap_resamples = 200

[[group]]
name = "proposed"

[[group]]
name = "control"
quiz = { selection = "uniform-control" }
"#;

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let cfg = ExperimentConfig::parse_toml(SMALL).unwrap();
    let bank = SyntheticBank::default().build();
    let a = run_experiment(&cfg, &bank, 7).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_experiment(&cfg, &bank, 7).unwrap());
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.render(), b.render());
    let c = run_experiment(&cfg, &bank, 8).unwrap();
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn contingency_rows_sum_to_100() {
    let cfg = ExperimentConfig::parse_toml(SMALL).unwrap();
    let report = run_experiment(&cfg, &SyntheticBank::default().build(), 3).unwrap();
    for g in &report.groups {
        for t in [&g.pretest, &g.posttest] {
            let sum: f64 = t.level_percent.iter().sum();
            assert!((sum - 100.0).abs() < 1e-9);
        }
    }
    let text = report.render();
    assert!(text.contains("population standard deviation"));
    assert!(text.contains("Correct answers by level"));
}

#[test]
fn no_learning_ablation_has_no_gain() {
    let cfg = ExperimentConfig::parse_toml(
        r#"
learners = 200
bootstrap_resamples = 200
[learner]
learning_rate = 0.0
concept_boost = 0.0
[[group]]
name = "proposed"
"#,
    )
    .unwrap();
    let report = run_experiment(&cfg, &SyntheticBank::default().build(), 7).unwrap();
    let g = &report.groups[0];
    assert!(g.gain.overall.mean.abs() < 0.03, "{}", g.gain.overall.mean);
    assert!(g.ability_growth.vocabulary == 0.0 && g.ability_growth.grammar == 0.0);
}

#[test]
fn perfect_and_single_learner_summaries() {
    let cfg = ExperimentConfig::parse_toml(SMALL).unwrap();
    let materials = Materials::prepare(&SyntheticBank::default().build(), 1).unwrap();
    let mut outcomes: Vec<_> = (0..5)
        .map(|i| simulate_learner(&cfg, &cfg.groups[0].quiz, &materials, 1, i).unwrap())
        .collect();
    for o in &mut outcomes {
        for r in o.pretest.iter_mut().chain(o.posttest.iter_mut()) {
            r.correct = true;
        }
    }
    let report = GroupReport::summarize(&cfg.groups[0], &outcomes, 100, &mut seed::rng(0));
    for t in [&report.pretest, &report.posttest] {
        for q in QType::ALL {
            assert_eq!(t.scores.get(q).mean, 1.0);
            assert_eq!(t.scores.get(q).sd, 0.0);
        }
        assert_eq!(t.overall.mean, 1.0);
        assert_eq!(t.overall.sd, 0.0);
    }
    let single = GroupReport::summarize(&cfg.groups[0], &outcomes[..1], 100, &mut seed::rng(0));
    assert_eq!(single.pretest.overall.sd, 0.0);
    assert_eq!(single.gain.overall.sd, 0.0);
}

#[test]
fn bootstrap_interval_brackets_the_mean() {
    let values: Vec<f64> = (0..100).map(|i| (i % 10) as f64 / 10.0).collect();
    let [lo, hi] = bootstrap_mean_ci(&values, 1000, &mut seed::rng(4));
    assert!(lo < 0.45 && 0.45 < hi && hi - lo < 0.2, "[{lo}, {hi}]");
    assert_eq!(bootstrap_mean_ci(&[0.3], 50, &mut seed::rng(4)), [0.3, 0.3]);
}

#[test]
fn config_errors_name_the_field() {
    let err = ExperimentConfig::parse_toml("learners = 3\n").unwrap_err().to_string();
    assert!(err.contains("group"), "{err}");
    let err = ExperimentConfig::parse_toml("bogus = 1\n[[group]]\nname = \"a\"\n").unwrap_err().to_string();
    assert!(err.contains("bogus"), "{err}");
    let err = ExperimentConfig::parse_toml(
        "[[group]]\nname = \"a\"\nquiz = { weights = { history = 0.5, fit = 0.6, challenging = 0.2 } }\n",
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains("group[0].quiz"), "{err}");
    let err = ExperimentConfig::parse_toml("[learner]\ndiscrimination = 0.0\n[[group]]\nname = \"a\"\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains("discrimination"), "{err}");
}
