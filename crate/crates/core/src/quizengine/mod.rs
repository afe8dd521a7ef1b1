//! Item bank, personalized quiz assembly, response recording, proficiency
//! estimation, the fixed pre/post test, and evaluation metrics.
//!
//! A quiz mixes three buckets per question type: fit items at the learner's
//! effective level, history items below it, and challenging items above it.
//! Concepts the learner missed in the fit bucket are retested first.

mod assemble;
mod bank;
mod events;
mod metrics;
mod prepost;
mod profile;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Level;
use crate::question::QType;

pub use assemble::{assemble_quiz, bucket_counts, BucketCounts};
pub use bank::{BankError, BankStats, Item, ItemBank};
pub use events::{replay, Applied, Closure, Event, LearnerState, OpenQuiz, StateError};
pub use metrics::{cohort_rectification, level_breakdown, mean_sd, rectification_rate, skill_scores, CohortRate};
pub use prepost::{build_pre_post_test, normalized_score, placement, Borrow, PrePostTest, PREPOST_LEVEL_COUNTS};
pub use profile::{
    update_proficiency, EstimatorConfig, LearnerProfile, LedgerEntry, ResponseRecord,
};

/// One value per skill (question type).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PerSkill<T> {
    pub vocabulary: T,
    pub grammar: T,
    pub reading: T,
}

impl<T> PerSkill<T> {
    pub fn from_fn(mut f: impl FnMut(QType) -> T) -> Self {
        PerSkill {
            vocabulary: f(QType::Vocabulary),
            grammar: f(QType::Grammar),
            reading: f(QType::Reading),
        }
    }

    pub fn splat(value: T) -> Self
    where
        T: Clone,
    {
        PerSkill::from_fn(|_| value.clone())
    }

    pub fn get(&self, qtype: QType) -> &T {
        match qtype {
            QType::Vocabulary => &self.vocabulary,
            QType::Grammar => &self.grammar,
            QType::Reading => &self.reading,
        }
    }

    pub fn get_mut(&mut self, qtype: QType) -> &mut T {
        match qtype {
            QType::Vocabulary => &mut self.vocabulary,
            QType::Grammar => &mut self.grammar,
            QType::Reading => &mut self.reading,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(QType, &T) -> U) -> PerSkill<U> {
        PerSkill::from_fn(|q| f(q, self.get(q)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Fit,
    History,
    Challenging,
    Pretest,
    Posttest,
}

impl Bucket {
    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Fit => "fit",
            Bucket::History => "history",
            Bucket::Challenging => "challenging",
            Bucket::Pretest => "pretest",
            Bucket::Posttest => "posttest",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bucket shares of a quiz. Must be non-negative and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketWeights {
    pub history: f64,
    pub fit: f64,
    pub challenging: f64,
}

impl Default for BucketWeights {
    fn default() -> Self {
        BucketWeights {
            history: 0.2,
            fit: 0.6,
            challenging: 0.2,
        }
    }
}

impl BucketWeights {
    pub fn validate(&self) -> Result<(), String> {
        let all = [self.history, self.fit, self.challenging];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err("bucket weights must be finite and non-negative".into());
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err("bucket weights must sum to 1".into());
        }
        Ok(())
    }
}

/// How item difficulties are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Buckets around the learner's level with missed-concept priority.
    #[default]
    Personalized,
    /// Levels drawn uniformly from 1..=6, ignoring proficiency and mistakes.
    UniformControl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuizSpec {
    #[serde(default = "default_counts")]
    pub counts: PerSkill<usize>,
    #[serde(default)]
    pub weights: BucketWeights,
    /// Added to the learner's level before drawing, per skill.
    #[serde(default)]
    pub offsets: PerSkill<i8>,
    #[serde(default)]
    pub selection: Selection,
}

fn default_counts() -> PerSkill<usize> {
    PerSkill {
        vocabulary: 10,
        grammar: 5,
        reading: 3,
    }
}

impl Default for QuizSpec {
    fn default() -> Self {
        QuizSpec {
            counts: default_counts(),
            weights: BucketWeights::default(),
            offsets: PerSkill::default(),
            selection: Selection::Personalized,
        }
    }
}

impl QuizSpec {
    pub fn validate(&self) -> Result<(), String> {
        self.weights.validate()?;
        if QType::ALL.iter().any(|q| !(-5..=5).contains(self.offsets.get(*q))) {
            return Err("offsets must lie in -5..=5".into());
        }
        Ok(())
    }

    /// Effective target level for a skill.
    pub fn effective_level(&self, qtype: QType, proficiency: Level) -> Level {
        Level::clamped(proficiency.get() as i64 + *self.offsets.get(qtype) as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuizKind {
    Pretest,
    Activity,
    Posttest,
}

/// One item as delivered: its bucket and the option order shown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub item_id: String,
    pub qtype: QType,
    pub difficulty: Level,
    pub concept: String,
    pub bucket: Bucket,
    /// `order[k]` is the canonical option index shown at position `k`.
    pub order: [usize; 4],
    /// Position of the correct option in the shown order.
    pub correct_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quiz {
    pub id: String,
    pub kind: QuizKind,
    /// Activity the quiz belongs to (0 for the pretest).
    pub activity: u32,
    pub deliveries: Vec<Delivery>,
}

/// What a client sees of one question: no answer key, no concept, no bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientQuestion {
    pub position: usize,
    pub qtype: QType,
    pub difficulty: Level,
    pub stem: String,
    pub options: [String; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientQuiz {
    pub quiz_id: String,
    pub kind: QuizKind,
    pub activity: u32,
    pub questions: Vec<ClientQuestion>,
}

impl Quiz {
    pub fn client_view(&self, bank: &ItemBank) -> ClientQuiz {
        ClientQuiz {
            quiz_id: self.id.clone(),
            kind: self.kind,
            activity: self.activity,
            questions: self
                .deliveries
                .iter()
                .enumerate()
                .map(|(position, d)| {
                    let item = bank.get(&d.item_id).expect("delivered items come from the bank");
                    ClientQuestion {
                        position,
                        qtype: d.qtype,
                        difficulty: d.difficulty,
                        stem: item.stem.clone(),
                        options: d.order.map(|i| item.options[i].clone()),
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuizError {
    #[error("bank exhausted for {qtype}: needed {needed}, found {found}")]
    BankExhausted { qtype: QType, needed: usize, found: usize },
    #[error("no delivery at position {0} in the open quiz")]
    UnknownDelivery(usize),
    #[error("option {0} is out of range (0..4)")]
    InvalidOption(usize),
    #[error("position {0} was already answered")]
    AlreadyAnswered(usize),
    #[error("invalid quiz spec: {0}")]
    InvalidSpec(String),
}

/// Largest-remainder apportionment of `total` across `weights`.
///
/// Remainder ties go to the earlier weight, so callers list weights in
/// tie-break priority order. Remainders within 1e-9 count as equal.
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    const EPS: f64 = 1e-9;
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q + EPS).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    let rem = |i: usize| {
        let r = quotas[i] - counts[i] as f64;
        (r / EPS).round() as i64
    };
    order.sort_by_key(|&i| (std::cmp::Reverse(rem(i)), i));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}
