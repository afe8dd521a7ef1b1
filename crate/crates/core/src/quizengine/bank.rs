use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PerSkill;
use crate::corpus::Level;
use crate::question::{McQuestion, QType, SourceRef};

/// A bank item. Options are stored in canonical (sorted) order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Item {
    pub id: String,
    pub qtype: QType,
    pub difficulty: Level,
    pub concept: String,
    pub stem: String,
    pub options: [String; 4],
    pub correct_index_canonical: usize,
    pub source: SourceRef,
}

impl Item {
    pub fn from_question(qtype: QType, q: &McQuestion) -> Item {
        let mut options: Vec<String> = std::iter::once(q.answer.clone())
            .chain(q.distractors.iter().cloned())
            .collect();
        options.sort();
        let correct = options.iter().position(|o| *o == q.answer).expect("answer is an option");
        let options: [String; 4] = options.try_into().expect("four options");
        Item {
            id: content_id(qtype, q.difficulty, &q.concept, &q.stem, &options, correct),
            qtype,
            difficulty: q.difficulty,
            concept: q.concept.clone(),
            stem: q.stem.clone(),
            options,
            correct_index_canonical: correct,
            source: q.source.clone(),
        }
    }

    pub fn answer(&self) -> &str {
        &self.options[self.correct_index_canonical]
    }

    fn expected_id(&self) -> String {
        content_id(
            self.qtype,
            self.difficulty,
            &self.concept,
            &self.stem,
            &self.options,
            self.correct_index_canonical,
        )
    }
}

/// First 16 hex digits of a SHA-256 over the item content.
pub fn content_id(
    qtype: QType,
    difficulty: Level,
    concept: &str,
    stem: &str,
    options: &[String; 4],
    correct: usize,
) -> String {
    let mut h = Sha256::new();
    for part in [qtype.as_str(), &difficulty.to_string(), concept, stem]
        .into_iter()
        .chain(options.iter().map(String::as_str))
    {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update((correct as u64).to_le_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum BankError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("item id {0} appears twice with different content")]
    DuplicateId(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Immutable item store indexed by id and by (type, level).
#[derive(Debug, Clone, Default)]
pub struct ItemBank {
    items: Vec<Item>,
    by_id: HashMap<String, usize>,
    pools: BTreeMap<(QType, Level), Vec<usize>>,
}

impl ItemBank {
    /// Builds a bank; exact duplicates collapse, conflicting ids are rejected.
    pub fn new(items: impl IntoIterator<Item = Item>) -> Result<ItemBank, BankError> {
        let mut bank = ItemBank::default();
        for item in items {
            if let Some(&at) = bank.by_id.get(&item.id) {
                if bank.items[at] != item {
                    return Err(BankError::DuplicateId(item.id));
                }
                continue;
            }
            let at = bank.items.len();
            bank.by_id.insert(item.id.clone(), at);
            bank.pools.entry((item.qtype, item.difficulty)).or_default().push(at);
            bank.items.push(item);
        }
        for pool in bank.pools.values_mut() {
            pool.sort_by(|&a, &b| bank.items[a].id.cmp(&bank.items[b].id));
        }
        Ok(bank)
    }

    pub fn parse_jsonl(text: &str) -> Result<ItemBank, BankError> {
        let mut items = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let item: Item = serde_json::from_str(line).map_err(|e| BankError::Format {
                line: n + 1,
                message: e.to_string(),
            })?;
            if item.correct_index_canonical >= 4 {
                return Err(BankError::Format {
                    line: n + 1,
                    message: "correct_index_canonical must be below 4".into(),
                });
            }
            if item.id != item.expected_id() {
                return Err(BankError::Format {
                    line: n + 1,
                    message: format!("id {} does not match item content", item.id),
                });
            }
            items.push(item);
        }
        ItemBank::new(items)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ItemBank, BankError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BankError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_jsonl(&text)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&serde_json::to_string(item).expect("items serialize"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BankError> {
        let path = path.as_ref();
        let io = |source| BankError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::fs::File::create(path).map_err(io)?;
        f.write_all(self.to_jsonl().as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.by_id.get(id).map(|&i| &self.items[i])
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Items of one type and level, ordered by id.
    pub fn pool(&self, qtype: QType, level: Level) -> impl Iterator<Item = &Item> {
        self.pools
            .get(&(qtype, level))
            .into_iter()
            .flatten()
            .map(|&i| &self.items[i])
    }

    pub fn pool_size(&self, qtype: QType, level: Level) -> usize {
        self.pools.get(&(qtype, level)).map_or(0, Vec::len)
    }

    /// A bank without the given ids.
    pub fn without<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> ItemBank {
        let drop: std::collections::HashSet<&str> = ids.into_iter().collect();
        ItemBank::new(self.items.iter().filter(|i| !drop.contains(i.id.as_str())).cloned())
            .expect("subset of a valid bank")
    }

    pub fn stats(&self) -> BankStats {
        let mut counts = PerSkill::<[usize; 6]>::default();
        for item in &self.items {
            counts.get_mut(item.qtype)[item.difficulty.index()] += 1;
        }
        BankStats { counts }
    }
}

/// Item counts per type and level (index 0 is level 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BankStats {
    pub counts: PerSkill<[usize; 6]>,
}

impl BankStats {
    pub fn total(&self) -> usize {
        QType::ALL.iter().map(|q| self.counts.get(*q).iter().sum::<usize>()).sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("type         L1    L2    L3    L4    L5    L6  total\n");
        for q in QType::ALL {
            let row = self.counts.get(q);
            out.push_str(&format!("{:<10}", q.as_str()));
            for c in row {
                out.push_str(&format!("{c:>6}"));
            }
            out.push_str(&format!("{:>7}\n", row.iter().sum::<usize>()));
        }
        out.push_str(&format!("{:<10}{:>43}\n", "all", self.total()));
        out
    }
}
