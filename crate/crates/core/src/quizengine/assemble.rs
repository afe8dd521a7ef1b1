use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;

use super::{apportion, Bucket, BucketWeights, Delivery, Item, ItemBank, LearnerProfile, Quiz, QuizError, QuizKind, QuizSpec, Selection};
use crate::corpus::Level;
use crate::question::QType;
use crate::seed::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BucketCounts {
    pub history: usize,
    pub fit: usize,
    pub challenging: usize,
}

/// Per-type bucket sizes at effective level `level`.
///
/// Remainder ties go fit, then history, then challenging. At level 1 the
/// history share joins fit; at level 6 the challenging share does.
pub fn bucket_counts(total: usize, weights: &BucketWeights, level: Level) -> BucketCounts {
    let c = apportion(total, &[weights.fit, weights.history, weights.challenging]);
    let mut out = BucketCounts {
        fit: c[0],
        history: c[1],
        challenging: c[2],
    };
    if level == Level::MIN {
        out.fit += std::mem::take(&mut out.history);
    }
    if level == Level::MAX {
        out.fit += std::mem::take(&mut out.challenging);
    }
    out
}

pub(crate) fn deliver(item: &Item, bucket: Bucket, rng: &mut Rng) -> Delivery {
    let mut order = [0usize, 1, 2, 3];
    order.shuffle(rng);
    let correct_index = order
        .iter()
        .position(|&i| i == item.correct_index_canonical)
        .expect("permutation");
    Delivery {
        item_id: item.id.clone(),
        qtype: item.qtype,
        difficulty: item.difficulty,
        concept: item.concept.clone(),
        bucket,
        order,
        correct_index,
    }
}

struct Picker<'a> {
    bank: &'a ItemBank,
    profile: &'a LearnerProfile,
    taken: HashSet<&'a str>,
    rng: Rng,
}

impl<'a> Picker<'a> {
    /// Up to `n` items at one level: priority concepts first (fresh items,
    /// one per concept), then fresh items at random, then the least
    /// recently delivered items.
    fn draw(&mut self, qtype: QType, level: Level, n: usize, priority: &[&str]) -> Vec<&'a Item> {
        let mut out: Vec<&'a Item> = Vec::with_capacity(n);
        let open: Vec<&'a Item> = self
            .bank
            .pool(qtype, level)
            .filter(|i| !self.taken.contains(i.id.as_str()))
            .collect();
        let is_fresh = |i: &Item| !self.profile.last_delivered.contains_key(&i.id);
        let mut fresh: Vec<&'a Item> = open.iter().copied().filter(|i| is_fresh(i)).collect();
        for concept in priority {
            if out.len() == n {
                break;
            }
            let same: Vec<usize> = (0..fresh.len()).filter(|&k| fresh[k].concept == *concept).collect();
            if let Some(&k) = same.choose(&mut self.rng) {
                out.push(fresh.remove(k));
            }
        }
        fresh.shuffle(&mut self.rng);
        let more = (n - out.len()).min(fresh.len());
        out.extend(fresh.drain(..more));
        if out.len() < n {
            let mut reuse: Vec<&'a Item> = open.iter().copied().filter(|i| !is_fresh(i)).collect();
            reuse.sort_by_key(|i| (self.profile.last_delivered[&i.id], i.id.as_str()));
            let more = (n - out.len()).min(reuse.len());
            out.extend(reuse.into_iter().take(more));
        }
        for item in &out {
            self.taken.insert(item.id.as_str());
        }
        out
    }

    /// Fills `n` items from `levels` in order, moving on only when a level runs dry.
    fn draw_falling(&mut self, qtype: QType, levels: impl Iterator<Item = Level>, n: usize) -> Vec<&'a Item> {
        let mut out = Vec::with_capacity(n);
        for level in levels {
            if out.len() == n {
                break;
            }
            let got = self.draw(qtype, level, n - out.len(), &[]);
            out.extend(got);
        }
        out
    }
}

/// Assembles the next activity quiz for a learner.
pub fn assemble_quiz(
    bank: &ItemBank,
    profile: &LearnerProfile,
    spec: &QuizSpec,
    rng_seed: u64,
) -> Result<Quiz, QuizError> {
    spec.validate().map_err(QuizError::InvalidSpec)?;
    let mut picker = Picker {
        bank,
        profile,
        taken: HashSet::new(),
        rng: seed::rng(rng_seed),
    };
    let mut chosen: Vec<(&Item, Bucket)> = Vec::new();
    for qtype in QType::ALL {
        let n = *spec.counts.get(qtype);
        if n == 0 {
            continue;
        }
        let proficiency = *profile.proficiency.get(qtype);
        let before = chosen.len();
        match spec.selection {
            Selection::Personalized => {
                let e = spec.effective_level(qtype, proficiency);
                let counts = bucket_counts(n, &spec.weights, e);
                let ledger = profile.unrectified(qtype);
                let priority: Vec<&str> = ledger.iter().map(|l| l.concept.as_str()).collect();
                let fit = picker.draw(qtype, e, counts.fit, &priority);
                let fit_short = fit.len() < counts.fit;
                chosen.extend(fit.into_iter().map(|i| (i, Bucket::Fit)));
                let below = (1..e.get()).rev().filter_map(Level::new);
                let history = picker.draw_falling(qtype, below, counts.history);
                let history_short = history.len() < counts.history;
                chosen.extend(history.into_iter().map(|i| (i, Bucket::History)));
                let above = (e.get() + 1..=6).filter_map(Level::new);
                let challenging = picker.draw_falling(qtype, above, counts.challenging);
                let challenging_short = challenging.len() < counts.challenging;
                chosen.extend(challenging.into_iter().map(|i| (i, Bucket::Challenging)));
                if fit_short || history_short || challenging_short {
                    return Err(QuizError::BankExhausted {
                        qtype,
                        needed: n,
                        found: chosen.len() - before,
                    });
                }
            }
            Selection::UniformControl => {
                for _ in 0..n {
                    let first = Level::new(picker.rng.gen_range(1..=6)).expect("1..=6");
                    let mut levels: Vec<Level> = Level::all().filter(|l| *l != first).collect();
                    levels.shuffle(&mut picker.rng);
                    let got = picker.draw_falling(qtype, std::iter::once(first).chain(levels), 1);
                    let Some(item) = got.into_iter().next() else {
                        return Err(QuizError::BankExhausted {
                            qtype,
                            needed: n,
                            found: chosen.len() - before,
                        });
                    };
                    let bucket = match item.difficulty.cmp(&proficiency) {
                        std::cmp::Ordering::Equal => Bucket::Fit,
                        std::cmp::Ordering::Less => Bucket::History,
                        std::cmp::Ordering::Greater => Bucket::Challenging,
                    };
                    chosen.push((item, bucket));
                }
            }
        }
    }
    let mut rng = picker.rng;
    chosen.shuffle(&mut rng);
    let deliveries = chosen.into_iter().map(|(item, b)| deliver(item, b, &mut rng)).collect();
    Ok(Quiz {
        id: format!("{:016x}", seed::derive(rng_seed, &["quiz"])),
        kind: QuizKind::Activity,
        activity: profile.activity + 1,
        deliveries,
    })
}
