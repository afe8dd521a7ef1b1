use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::assemble::deliver;
use super::{apportion, Bucket, ItemBank, PerSkill, Quiz, QuizError, QuizKind, ResponseRecord};
use crate::corpus::Level;
use crate::question::QType;
use crate::seed;

/// Items per level (1..=6) of the fixed test.
pub const PREPOST_LEVEL_COUNTS: [usize; 6] = [6, 3, 6, 3, 7, 3];

/// Question-type mix within each level, in tie-break order.
const TYPE_MIX: [f64; 3] = [10.0, 5.0, 3.0];

/// Items moved to another type at one level because the planned type ran short.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Borrow {
    pub level: Level,
    pub short: QType,
    pub from: QType,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrePostTest {
    pub item_ids: Vec<String>,
    pub borrowed: Vec<Borrow>,
}

/// Draws the 28-item level-stratified test.
pub fn build_pre_post_test(bank: &ItemBank, rng_seed: u64) -> Result<PrePostTest, QuizError> {
    let mut rng = seed::rng(rng_seed);
    let mut item_ids = Vec::with_capacity(28);
    let mut borrowed = Vec::new();
    for level in Level::all() {
        let count = PREPOST_LEVEL_COUNTS[level.index()];
        let plan = apportion(count, &TYPE_MIX);
        let mut pools: Vec<Vec<&str>> = QType::ALL
            .iter()
            .map(|q| {
                let mut ids: Vec<&str> = bank.pool(*q, level).map(|i| i.id.as_str()).collect();
                ids.shuffle(&mut rng);
                ids
            })
            .collect();
        let mut short = Vec::new();
        for (t, &want) in plan.iter().enumerate() {
            let take = want.min(pools[t].len());
            item_ids.extend(pools[t].drain(..take).map(String::from));
            if take < want {
                short.push((t, want - take));
            }
        }
        for (t, mut missing) in short {
            for (from, pool) in pools.iter_mut().enumerate() {
                if missing == 0 {
                    break;
                }
                let take = missing.min(pool.len());
                if take > 0 {
                    item_ids.extend(pool.drain(..take).map(String::from));
                    borrowed.push(Borrow {
                        level,
                        short: QType::ALL[t],
                        from: QType::ALL[from],
                        count: take,
                    });
                    missing -= take;
                }
            }
            if missing > 0 {
                return Err(QuizError::BankExhausted {
                    qtype: QType::ALL[t],
                    needed: count,
                    found: count - missing,
                });
            }
        }
    }
    Ok(PrePostTest { item_ids, borrowed })
}

impl PrePostTest {
    pub fn quiz(&self, bank: &ItemBank, kind: QuizKind, activity: u32, rng_seed: u64) -> Quiz {
        let bucket = match kind {
            QuizKind::Posttest => Bucket::Posttest,
            _ => Bucket::Pretest,
        };
        let mut rng = seed::rng(rng_seed);
        let mut ids: Vec<&String> = self.item_ids.iter().collect();
        ids.shuffle(&mut rng);
        Quiz {
            id: format!("{:016x}", seed::derive(rng_seed, &["quiz"])),
            kind,
            activity,
            deliveries: ids
                .into_iter()
                .map(|id| deliver(bank.get(id).expect("test items come from the bank"), bucket, &mut rng))
                .collect(),
        }
    }
}

/// Initial level per skill from fixed-test responses.
///
/// Levels are scanned upward; a level with items passes at 50% correct, a
/// level without items of that skill is skipped, and the scan ends at the
/// first failure, placing at the highest level passed. Passing every
/// level gives 6; nothing passing gives 1.
pub fn placement(responses: &[ResponseRecord]) -> PerSkill<Level> {
    PerSkill::from_fn(|qtype| {
        let mut placed = Level::MIN;
        for level in Level::all() {
            let at: Vec<&ResponseRecord> = responses
                .iter()
                .filter(|r| r.qtype == qtype && r.difficulty == level)
                .collect();
            if at.is_empty() {
                continue;
            }
            let correct = at.iter().filter(|r| r.correct).count();
            if 2 * correct >= at.len() {
                placed = level;
            } else {
                return placed;
            }
        }
        Level::MAX
    })
}

/// Fraction of responses answered correctly; `None` when empty.
pub fn normalized_score<'a>(responses: impl IntoIterator<Item = &'a ResponseRecord>) -> Option<f64> {
    let (mut n, mut c) = (0usize, 0usize);
    for r in responses {
        n += 1;
        c += r.correct as usize;
    }
    (n > 0).then(|| c as f64 / n as f64)
}
