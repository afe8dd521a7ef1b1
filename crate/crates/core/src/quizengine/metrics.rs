use serde::Serialize;

use super::{LearnerProfile, PerSkill, ResponseRecord};
use crate::question::QType;

/// Share of re-tested fit misses later answered correctly.
///
/// Entries never re-tested after the miss count in neither numerator nor
/// denominator; with no re-tested entries the rate is absent.
pub fn rectification_rate(profile: &LearnerProfile) -> Option<f64> {
    let (mut retested, mut rectified) = (0usize, 0usize);
    for entry in profile.mistake_ledger.values() {
        let mut later = profile.history[entry.missed_seq + 1..]
            .iter()
            .filter(|r| r.qtype == entry.qtype && r.concept == entry.concept)
            .peekable();
        if later.peek().is_none() {
            continue;
        }
        retested += 1;
        if later.any(|r| r.correct) {
            rectified += 1;
        }
    }
    (retested > 0).then(|| rectified as f64 / retested as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortRate {
    /// Mean of per-learner rates over learners that have one.
    pub mean: Option<f64>,
    /// Population standard deviation of the per-learner rates.
    pub sd: Option<f64>,
    pub learners_with_rate: usize,
    pub learners: usize,
}

pub fn cohort_rectification<'a>(profiles: impl IntoIterator<Item = &'a LearnerProfile>) -> CohortRate {
    let mut learners = 0;
    let rates: Vec<f64> = profiles
        .into_iter()
        .inspect(|_| learners += 1)
        .filter_map(rectification_rate)
        .collect();
    let (mean, sd) = mean_sd(&rates).unzip();
    CohortRate {
        mean,
        sd,
        learners_with_rate: rates.len(),
        learners,
    }
}

/// Mean and population standard deviation.
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Correct-answer counts per difficulty level (index 0 is level 1).
pub fn level_breakdown<'a>(responses: impl IntoIterator<Item = &'a ResponseRecord>) -> [u64; 6] {
    let mut out = [0u64; 6];
    for r in responses {
        if r.correct {
            out[r.difficulty.index()] += 1;
        }
    }
    out
}

/// Fraction correct per question type; `None` for types with no responses.
pub fn skill_scores<'a>(responses: impl IntoIterator<Item = &'a ResponseRecord> + Clone) -> PerSkill<Option<f64>> {
    PerSkill::from_fn(|q: QType| {
        let (mut n, mut c) = (0usize, 0usize);
        for r in responses.clone() {
            if r.qtype == q {
                n += 1;
                c += r.correct as usize;
            }
        }
        (n > 0).then(|| c as f64 / n as f64)
    })
}
