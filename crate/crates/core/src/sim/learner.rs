use std::collections::HashMap;

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::AbilityConfig;
use crate::quizengine::{Delivery, PerSkill};
use crate::seed::Rng;

/// Lowest and highest true ability.
pub const ABILITY_RANGE: (f64, f64) = (0.5, 6.5);

/// Response-model and learning constants shared by a cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerModel {
    /// Logistic slope `a`.
    #[serde(default = "default_discrimination")]
    pub discrimination: f64,
    /// Fraction `γ` of an activity's growth lost when any item of the skill
    /// is more than one level above ability.
    #[serde(default = "default_penalty")]
    pub penalty: f64,
    /// Ability bonus `b` on a concept after missing it in an activity.
    #[serde(default = "default_boost")]
    pub concept_boost: f64,
    /// Ability growth `λ` per engaged activity.
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
}

fn default_discrimination() -> f64 {
    1.5
}
fn default_penalty() -> f64 {
    0.5
}
fn default_boost() -> f64 {
    0.75
}
fn default_learning_rate() -> f64 {
    0.05
}

impl Default for LearnerModel {
    fn default() -> Self {
        LearnerModel {
            discrimination: default_discrimination(),
            penalty: default_penalty(),
            concept_boost: default_boost(),
            learning_rate: default_learning_rate(),
        }
    }
}

impl LearnerModel {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("discrimination", self.discrimination),
            ("penalty", self.penalty),
            ("concept_boost", self.concept_boost),
            ("learning_rate", self.learning_rate),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(format!("learner.{name} must be finite"));
            }
        }
        if self.discrimination <= 0.0 {
            return Err("learner.discrimination must be positive".into());
        }
        if self.penalty < 0.0 {
            return Err("learner.penalty must be non-negative".into());
        }
        Ok(())
    }

    /// `0.25 + 0.75 * logistic(a * (ability - difficulty))`.
    pub fn p_correct(&self, ability: f64, difficulty: f64) -> f64 {
        let x = self.discrimination * (ability - difficulty);
        0.25 + 0.75 / (1.0 + (-x).exp())
    }
}

/// A simulated learner.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLearner {
    pub ability: PerSkill<f64>,
    /// Concepts missed during activities, keyed `qtype:concept`.
    pub boosted: HashMap<String, f64>,
}

impl SimLearner {
    pub fn sample(cfg: &AbilityConfig, rng: &mut Rng) -> SimLearner {
        let base = cfg.mean + cfg.sd * rng.sample::<f64, _>(StandardNormal);
        let ability = PerSkill::from_fn(|_| {
            let v = base + cfg.skill_sd * rng.sample::<f64, _>(StandardNormal);
            v.clamp(ABILITY_RANGE.0, ABILITY_RANGE.1)
        });
        SimLearner {
            ability,
            boosted: HashMap::new(),
        }
    }

    fn boost(&self, d: &Delivery) -> f64 {
        self.boosted.get(&boost_key(d)).copied().unwrap_or(0.0)
    }

    /// Chosen position for one delivery. Two uniforms are always consumed so
    /// that later draws do not depend on the outcome; the response is
    /// correct iff the first falls below the success probability, which
    /// makes correctness monotone in ability.
    pub fn respond(&self, model: &LearnerModel, d: &Delivery, rng: &mut Rng) -> usize {
        let u: f64 = rng.gen();
        let pick: usize = rng.gen_range(0..3);
        let ability = *self.ability.get(d.qtype) + self.boost(d);
        if u < model.p_correct(ability, d.difficulty.get() as f64) {
            d.correct_index
        } else {
            (0..4).filter(|&k| k != d.correct_index).nth(pick).expect("three distractors")
        }
    }

    /// Remembers a missed concept.
    pub fn feedback(&mut self, model: &LearnerModel, d: &Delivery, correct: bool) {
        if !correct && model.concept_boost != 0.0 {
            self.boosted.insert(boost_key(d), model.concept_boost);
        }
    }

    /// Applies one activity's growth per skill. A skill is engaged when the
    /// mean delivered difficulty lies within one level of its ability; an
    /// item more than one level above ability scales the growth by `1 - γ`.
    pub fn learn(&mut self, model: &LearnerModel, deliveries: &[Delivery]) -> PerSkill<bool> {
        let before = self.ability;
        PerSkill::from_fn(|q| {
            let theta = *before.get(q);
            let ds: Vec<f64> = deliveries
                .iter()
                .filter(|d| d.qtype == q)
                .map(|d| d.difficulty.get() as f64)
                .collect();
            if ds.is_empty() {
                return false;
            }
            let mean = ds.iter().sum::<f64>() / ds.len() as f64;
            let engaged = (mean - theta).abs() <= 1.0;
            if engaged {
                let mut growth = model.learning_rate;
                if ds.iter().any(|&d| d > theta + 1.0) {
                    growth *= (1.0 - model.penalty).max(0.0);
                }
                *self.ability.get_mut(q) = (theta + growth).clamp(ABILITY_RANGE.0, ABILITY_RANGE.1);
            }
            engaged
        })
    }
}

fn boost_key(d: &Delivery) -> String {
    format!("{}:{}", d.qtype, d.concept)
}
