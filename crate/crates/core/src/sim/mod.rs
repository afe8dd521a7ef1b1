//! Simulated learners run through the experimental protocol: a fixed
//! pretest, a series of activities assembled by a group's selection
//! policy, and a level-matched post-test.
//!
//! Every learner draws from child seeds keyed by its index, so groups see
//! the same learners and results do not depend on thread scheduling.

mod bank;
mod learner;
mod report;

use std::path::PathBuf;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quizengine::{
    assemble_quiz, build_pre_post_test, rectification_rate, Applied, Event, EstimatorConfig, ItemBank,
    LearnerState, PerSkill, PrePostTest, Quiz, QuizError, QuizKind, QuizSpec, ResponseRecord, StateError,
};
use crate::seed;

pub use bank::SyntheticBank;
pub use learner::{LearnerModel, SimLearner, ABILITY_RANGE};
pub use report::{bootstrap_mean_ci, GainSummary, GroupReport, MeanSd, MetricsReport, TestSummary};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Quiz(#[from] QuizError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Population the true abilities are drawn from: a shared per-learner base
/// plus independent per-skill deviations, clamped to [`ABILITY_RANGE`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbilityConfig {
    pub mean: f64,
    pub sd: f64,
    pub skill_sd: f64,
}

impl Default for AbilityConfig {
    fn default() -> Self {
        AbilityConfig {
            mean: 3.0,
            sd: 1.0,
            skill_sd: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BankSource {
    Synthetic(SyntheticBank),
    /// An item bank file; relative paths resolve against the config file.
    File { path: PathBuf },
}

impl Default for BankSource {
    fn default() -> Self {
        BankSource::Synthetic(SyntheticBank::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    #[serde(default)]
    pub quiz: QuizSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_learners")]
    pub learners: usize,
    #[serde(default = "default_activities")]
    pub activities: u32,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_resamples: usize,
    #[serde(default)]
    pub learner: LearnerModel,
    #[serde(default)]
    pub ability: AbilityConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub bank: BankSource,
    #[serde(rename = "group")]
    pub groups: Vec<GroupConfig>,
}

fn default_learners() -> usize {
    200
}
fn default_activities() -> u32 {
    12
}
fn default_bootstrap() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn parse_toml(text: &str) -> Result<ExperimentConfig, SimError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.groups.is_empty() {
            return bad("at least one [[group]] is required".into());
        }
        for (i, g) in self.groups.iter().enumerate() {
            if let Err(e) = g.quiz.validate() {
                return bad(format!("group[{i}].quiz: {e}"));
            }
            if self.groups[..i].iter().any(|o| o.name == g.name) {
                return bad(format!("group[{i}].name: duplicate {:?}", g.name));
            }
        }
        self.learner.validate().map_err(SimError::Config)?;
        let a = &self.ability;
        if ![a.mean, a.sd, a.skill_sd].iter().all(|v| v.is_finite()) || a.sd < 0.0 || a.skill_sd < 0.0 {
            return bad("ability: mean must be finite and deviations non-negative".into());
        }
        let e = &self.estimator;
        if !(e.decay > 0.0 && e.decay <= 1.0) || !(0.0..=1.0).contains(&e.threshold) || e.min_obs < 0.0 {
            return bad("estimator: decay in (0,1], threshold in [0,1], min_obs >= 0".into());
        }
        if self.learners == 0 {
            return bad("learners must be positive".into());
        }
        Ok(())
    }
}

/// Everything kept from one simulated learner.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerOutcome {
    pub initial_ability: PerSkill<f64>,
    pub final_ability: PerSkill<f64>,
    pub placement: PerSkill<crate::corpus::Level>,
    pub final_proficiency: PerSkill<crate::corpus::Level>,
    pub pretest: Vec<ResponseRecord>,
    pub posttest: Vec<ResponseRecord>,
    pub rectification: Option<f64>,
    /// Activities in which each skill was engaged.
    pub engaged: PerSkill<u32>,
    /// Mean delivered activity difficulty minus starting ability, per skill.
    pub mean_offset: PerSkill<f64>,
    pub events: Vec<Event>,
    pub state: LearnerState,
}

/// The fixed tests and the pool left for activities.
pub struct Materials {
    pub pretest: PrePostTest,
    pub posttest: PrePostTest,
    pub test_bank: ItemBank,
    pub activity_bank: ItemBank,
}

impl Materials {
    pub fn prepare(bank: &ItemBank, master_seed: u64) -> Result<Materials, SimError> {
        let pretest = build_pre_post_test(bank, seed::derive(master_seed, &["pretest"]))?;
        let rest = bank.without(pretest.item_ids.iter().map(String::as_str));
        let posttest = build_pre_post_test(&rest, seed::derive(master_seed, &["posttest"]))?;
        let activity_bank = rest.without(posttest.item_ids.iter().map(String::as_str));
        Ok(Materials {
            pretest,
            posttest,
            test_bank: bank.clone(),
            activity_bank,
        })
    }
}

fn take_quiz(
    state: &mut LearnerState,
    events: &mut Vec<Event>,
    learner: &mut SimLearner,
    quiz: Quiz,
    cfg: &ExperimentConfig,
    rng: &mut seed::Rng,
    feedback: bool,
) -> Result<Vec<ResponseRecord>, SimError> {
    let deliveries = quiz.deliveries.clone();
    let delivered = Event::Delivered { quiz };
    state.apply(&delivered, &cfg.estimator)?;
    events.push(delivered);
    for (position, d) in deliveries.iter().enumerate() {
        let chosen = learner.respond(&cfg.learner, d, rng);
        let answered = Event::Answered {
            position,
            chosen,
            timestamp: events.len() as u64,
        };
        if let Applied::Answered(r) = state.apply(&answered, &cfg.estimator)? {
            if feedback {
                learner.feedback(&cfg.learner, d, r.correct);
            }
        }
        events.push(answered);
    }
    let closed = Event::Closed {
        timestamp: events.len() as u64,
    };
    let Applied::Closed(closure) = state.apply(&closed, &cfg.estimator)? else {
        unreachable!("closing an open quiz yields a closure");
    };
    events.push(closed);
    Ok(closure.responses)
}

/// Runs one learner of one group.
pub fn simulate_learner(
    cfg: &ExperimentConfig,
    spec: &QuizSpec,
    materials: &Materials,
    master_seed: u64,
    index: usize,
) -> Result<LearnerOutcome, SimError> {
    let idx = index.to_string();
    let ls = seed::derive(master_seed, &["learner", &idx]);
    let mut learner = SimLearner::sample(&cfg.ability, &mut seed::rng(seed::derive(ls, &["ability"])));
    let initial_ability = learner.ability;
    let mut rng = seed::rng(seed::derive(ls, &["responses"]));
    let learner_id = format!("learner-{idx:0>4}");
    let mut events = vec![Event::Created {
        learner_id: learner_id.clone(),
    }];
    let mut state = LearnerState::new(learner_id);

    let quiz = materials
        .pretest
        .quiz(&materials.test_bank, QuizKind::Pretest, 0, seed::derive(ls, &["pretest"]));
    let pretest = take_quiz(&mut state, &mut events, &mut learner, quiz, cfg, &mut rng, false)?;
    let placement = state.profile.proficiency;

    let mut engaged = PerSkill::<u32>::default();
    let mut offset_sum = PerSkill::<f64>::default();
    let mut offset_n = PerSkill::<u32>::default();
    for a in 1..=cfg.activities {
        let quiz_seed = seed::derive(ls, &["activity", &a.to_string()]);
        let quiz = assemble_quiz(&materials.activity_bank, &state.profile, spec, quiz_seed)?;
        let deliveries = quiz.deliveries.clone();
        for d in &deliveries {
            *offset_sum.get_mut(d.qtype) += d.difficulty.get() as f64 - learner.ability.get(d.qtype);
            *offset_n.get_mut(d.qtype) += 1;
        }
        take_quiz(&mut state, &mut events, &mut learner, quiz, cfg, &mut rng, true)?;
        let e = learner.learn(&cfg.learner, &deliveries);
        for q in crate::question::QType::ALL {
            *engaged.get_mut(q) += *e.get(q) as u32;
        }
    }

    let post_activity = state.profile.activity;
    let quiz = materials.posttest.quiz(
        &materials.test_bank,
        QuizKind::Posttest,
        post_activity,
        seed::derive(ls, &["posttest"]),
    );
    let posttest = take_quiz(&mut state, &mut events, &mut learner, quiz, cfg, &mut rng, false)?;
    Ok(LearnerOutcome {
        initial_ability,
        final_ability: learner.ability,
        placement,
        final_proficiency: state.profile.proficiency,
        pretest,
        posttest,
        rectification: rectification_rate(&state.profile),
        engaged,
        mean_offset: offset_sum.map(|q, s| {
            let n = *offset_n.get(q);
            if n == 0 {
                0.0
            } else {
                s / n as f64
            }
        }),
        events,
        state,
    })
}

/// Runs every group over the same learners and summarizes.
pub fn run_experiment(cfg: &ExperimentConfig, bank: &ItemBank, master_seed: u64) -> Result<MetricsReport, SimError> {
    cfg.validate()?;
    let materials = Materials::prepare(bank, master_seed)?;
    let mut groups = Vec::with_capacity(cfg.groups.len());
    for group in &cfg.groups {
        let outcomes = run_group(cfg, &group.quiz, &materials, master_seed)?;
        let mut boot = seed::rng(seed::derive(master_seed, &["bootstrap", &group.name]));
        groups.push(GroupReport::summarize(group, &outcomes, cfg.bootstrap_resamples, &mut boot));
    }
    Ok(MetricsReport {
        seed: master_seed,
        learners: cfg.learners,
        activities: cfg.activities,
        bank_items: bank.len(),
        groups,
    })
}

pub fn run_group(
    cfg: &ExperimentConfig,
    spec: &QuizSpec,
    materials: &Materials,
    master_seed: u64,
) -> Result<Vec<LearnerOutcome>, SimError> {
    (0..cfg.learners)
        .into_par_iter()
        .map(|i| simulate_learner(cfg, spec, materials, master_seed, i))
        .collect()
}

/// Uniform index draw used by the bootstrap.
pub(crate) fn draw_index(rng: &mut seed::Rng, n: usize) -> usize {
    rng.gen_range(0..n)
}
