use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Bucket, Delivery, PerSkill, QuizError};
use crate::corpus::Level;
use crate::question::QType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub item_id: String,
    pub qtype: QType,
    pub difficulty: Level,
    pub concept: String,
    pub bucket: Bucket,
    pub chosen: usize,
    pub correct: bool,
    pub activity: u32,
    pub timestamp: u64,
}

/// A concept missed in the fit bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub qtype: QType,
    pub concept: String,
    pub missed_at: u32,
    /// History index of the miss that created the entry.
    pub missed_seq: usize,
    pub rectified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectified_at: Option<u32>,
}

pub(crate) fn ledger_key(qtype: QType, concept: &str) -> String {
    format!("{qtype}:{concept}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerProfile {
    pub learner_id: String,
    pub proficiency: PerSkill<Level>,
    /// Completed activities.
    pub activity: u32,
    pub history: Vec<ResponseRecord>,
    pub mistake_ledger: BTreeMap<String, LedgerEntry>,
    /// Delivery sequence number of the last time each item was shown.
    pub last_delivered: BTreeMap<String, u64>,
    pub deliveries: u64,
}

impl LearnerProfile {
    pub fn new(learner_id: impl Into<String>) -> Self {
        LearnerProfile {
            learner_id: learner_id.into(),
            proficiency: PerSkill::splat(Level::MIN),
            activity: 0,
            history: Vec::new(),
            mistake_ledger: BTreeMap::new(),
            last_delivered: BTreeMap::new(),
            deliveries: 0,
        }
    }

    pub fn note_delivered(&mut self, deliveries: &[Delivery]) {
        for d in deliveries {
            self.deliveries += 1;
            self.last_delivered.insert(d.item_id.clone(), self.deliveries);
        }
    }

    /// Grades a response and updates the mistake ledger.
    pub fn record_response(
        &mut self,
        delivery: &Delivery,
        chosen: usize,
        activity: u32,
        timestamp: u64,
    ) -> Result<ResponseRecord, QuizError> {
        if chosen >= 4 {
            return Err(QuizError::InvalidOption(chosen));
        }
        let correct = chosen == delivery.correct_index;
        let seq = self.history.len();
        let key = ledger_key(delivery.qtype, &delivery.concept);
        if correct {
            if let Some(entry) = self.mistake_ledger.get_mut(&key) {
                if !entry.rectified && entry.missed_seq < seq {
                    entry.rectified = true;
                    entry.rectified_at = Some(activity);
                }
            }
        } else if delivery.bucket == Bucket::Fit {
            self.mistake_ledger.entry(key).or_insert_with(|| LedgerEntry {
                qtype: delivery.qtype,
                concept: delivery.concept.clone(),
                missed_at: activity,
                missed_seq: seq,
                rectified: false,
                rectified_at: None,
            });
        }
        let record = ResponseRecord {
            item_id: delivery.item_id.clone(),
            qtype: delivery.qtype,
            difficulty: delivery.difficulty,
            concept: delivery.concept.clone(),
            bucket: delivery.bucket,
            chosen,
            correct,
            activity,
            timestamp,
        };
        self.history.push(record.clone());
        Ok(record)
    }

    /// Unrectified ledger concepts of one type, oldest miss first.
    pub fn unrectified(&self, qtype: QType) -> Vec<&LedgerEntry> {
        let mut out: Vec<&LedgerEntry> = self
            .mistake_ledger
            .values()
            .filter(|e| e.qtype == qtype && !e.rectified)
            .collect();
        out.sort_by_key(|e| e.missed_seq);
        out
    }
}

/// Decayed per-level accuracy estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub decay: f64,
    pub threshold: f64,
    pub min_obs: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            decay: 0.8,
            threshold: 0.6,
            min_obs: 3.0,
        }
    }
}

/// New per-skill levels from the response history.
///
/// For each level, accuracy is averaged with weight `decay^(age in
/// activities)`. The candidate is the highest level reached by scanning
/// upward while every sufficiently observed level passes `threshold`;
/// unobserved levels below the current one count as passed. The result
/// moves at most one level toward the candidate.
pub fn update_proficiency(profile: &LearnerProfile, cfg: &EstimatorConfig) -> PerSkill<Level> {
    PerSkill::from_fn(|qtype| {
        let old = *profile.proficiency.get(qtype);
        let mut num = [0.0f64; 6];
        let mut den = [0.0f64; 6];
        let mut any = false;
        for r in profile
            .history
            .iter()
            .filter(|r| r.qtype == qtype && r.bucket != Bucket::Posttest)
        {
            any = true;
            let age = profile.activity.saturating_sub(r.activity) as i32;
            let w = cfg.decay.powi(age);
            den[r.difficulty.index()] += w;
            if r.correct {
                num[r.difficulty.index()] += w;
            }
        }
        if !any {
            return old;
        }
        let mut candidate = Level::MIN;
        for level in Level::all() {
            let i = level.index();
            if den[i] + 1e-12 >= cfg.min_obs {
                if num[i] / den[i] + 1e-12 >= cfg.threshold {
                    candidate = level;
                } else {
                    break;
                }
            } else if level < old {
                candidate = level;
            } else {
                break;
            }
        }
        let step = (candidate.get() as i64 - old.get() as i64).signum();
        Level::clamped(old.get() as i64 + step)
    })
}
