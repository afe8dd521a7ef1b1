use crate::corpus::ParseNode;

use super::{Pattern, Relation};

/// A node identified by its pre-order position.
#[derive(Debug, Clone, Copy)]
pub struct NodeRef<'t> {
    pub index: usize,
    pub node: &'t ParseNode,
}

impl PartialEq for NodeRef<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && std::ptr::eq(self.node, other.node)
    }
}

impl Eq for NodeRef<'_> {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult<'t> {
    pub root: NodeRef<'t>,
    /// Bound captures in declaration order.
    pub captures: Vec<(String, NodeRef<'t>)>,
}

impl<'t> MatchResult<'t> {
    pub fn get(&self, name: &str) -> Option<NodeRef<'t>> {
        self.captures
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, node)| node)
    }
}

struct Slot<'t> {
    node: &'t ParseNode,
    children: Vec<usize>,
    /// Pre-order index of the last descendant.
    last: usize,
}

/// Pre-order index over a parse tree.
pub struct IndexedTree<'t> {
    slots: Vec<Slot<'t>>,
}

impl<'t> IndexedTree<'t> {
    pub fn new(root: &'t ParseNode) -> Self {
        let mut slots = Vec::with_capacity(root.node_count());
        Self::push(root, &mut slots);
        IndexedTree { slots }
    }

    fn push(node: &'t ParseNode, slots: &mut Vec<Slot<'t>>) -> usize {
        let me = slots.len();
        slots.push(Slot {
            node,
            children: Vec::with_capacity(node.children.len()),
            last: me,
        });
        for child in &node.children {
            let c = Self::push(child, slots);
            slots[me].children.push(c);
        }
        slots[me].last = slots.len() - 1;
        me
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn node(&self, index: usize) -> NodeRef<'t> {
        NodeRef {
            index,
            node: self.slots[index].node,
        }
    }

    fn candidates(&self, index: usize, relation: Relation) -> Vec<usize> {
        match relation {
            Relation::ImmediatelyDominates => self.slots[index].children.clone(),
            Relation::Dominates => (index + 1..=self.slots[index].last).collect(),
        }
    }

    /// All matches of `pattern`, ordered by root position then capture positions.
    pub fn match_all(&self, pattern: &Pattern) -> Vec<MatchResult<'t>> {
        let names: Vec<String> = pattern.captures().into_iter().map(String::from).collect();
        let mut out = Vec::new();
        for root in 0..self.slots.len() {
            let mut assignments = self.match_at(root, pattern, &names);
            assignments.sort();
            assignments.dedup();
            for assignment in assignments {
                out.push(MatchResult {
                    root: self.node(root),
                    captures: names
                        .iter()
                        .zip(assignment)
                        .map(|(n, i)| (n.clone(), self.node(i.expect("every capture bound"))))
                        .collect(),
                });
            }
        }
        out
    }

    fn holds(&self, index: usize, pattern: &Pattern) -> bool {
        let slot = &self.slots[index];
        if !pattern.root.descriptor.matches(&slot.node.label, slot.node.is_leaf()) {
            return false;
        }
        pattern.constraints.iter().all(|c| {
            let any = self
                .candidates(index, c.relation)
                .into_iter()
                .any(|cand| self.holds(cand, &c.operand));
            any != c.negated
        })
    }

    /// Capture assignments (slot per name) for `pattern` rooted at `index`.
    fn match_at(&self, index: usize, pattern: &Pattern, names: &[String]) -> Vec<Vec<Option<usize>>> {
        let slot = &self.slots[index];
        if !pattern.root.descriptor.matches(&slot.node.label, slot.node.is_leaf()) {
            return Vec::new();
        }
        let mut base = vec![None; names.len()];
        if let Some(name) = &pattern.root.capture {
            let at = names.iter().position(|n| n == name).expect("declared capture");
            base[at] = Some(index);
        }
        let mut partial = vec![base];
        for c in &pattern.constraints {
            if c.negated {
                let blocked = self
                    .candidates(index, c.relation)
                    .into_iter()
                    .any(|cand| self.holds(cand, &c.operand));
                if blocked {
                    return Vec::new();
                }
                continue;
            }
            let mut sub = Vec::new();
            for cand in self.candidates(index, c.relation) {
                sub.extend(self.match_at(cand, &c.operand, names));
            }
            sub.sort();
            sub.dedup();
            if sub.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::with_capacity(partial.len() * sub.len());
            for left in &partial {
                for right in &sub {
                    let merged: Vec<Option<usize>> =
                        left.iter().zip(right).map(|(a, b)| a.or(*b)).collect();
                    next.push(merged);
                }
            }
            partial = next;
        }
        partial
    }
}

/// Every (root, capture assignment) pair satisfying `pattern` in `tree`.
pub fn match_all<'t>(tree: &'t ParseNode, pattern: &Pattern) -> Vec<MatchResult<'t>> {
    IndexedTree::new(tree).match_all(pattern)
}
