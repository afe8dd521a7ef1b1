use serde::{Deserialize, Serialize};

use crate::corpus::Level;
use crate::question::{McQuestion, QType, SourceRef};
use crate::quizengine::{Item, ItemBank, PerSkill};

/// A generated bank with a fixed number of concepts per (type, level) and
/// a fixed number of items per concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticBank {
    /// Concepts per level, per type.
    pub concepts: PerSkill<usize>,
    pub items_per_concept: PerSkill<usize>,
}

impl Default for SyntheticBank {
    fn default() -> Self {
        SyntheticBank {
            concepts: PerSkill {
                vocabulary: 40,
                grammar: 4,
                reading: 20,
            },
            items_per_concept: PerSkill {
                vocabulary: 3,
                grammar: 12,
                reading: 3,
            },
        }
    }
}

impl SyntheticBank {
    pub fn build(&self) -> ItemBank {
        let mut items = Vec::new();
        for qtype in QType::ALL {
            for level in Level::all() {
                for c in 0..*self.concepts.get(qtype) {
                    let concept = format!("{qtype}-L{level}-{c:03}");
                    for k in 0..*self.items_per_concept.get(qtype) {
                        let q = McQuestion {
                            stem: format!("{concept} item {k}: pick the right option."),
                            answer: format!("right {k}"),
                            distractors: [1, 2, 3].map(|j| format!("wrong {k}.{j}")),
                            difficulty: level,
                            concept: concept.clone(),
                            source: SourceRef {
                                article: format!("synthetic-{concept}"),
                                sentence: Some(k),
                                token: None,
                            },
                        };
                        items.push(Item::from_question(qtype, &q));
                    }
                }
            }
        }
        ItemBank::new(items).expect("synthetic ids are distinct")
    }
}
