//! A small tree-pattern language over constituency parses.
//!
//! ```text
//! pattern    := node constraint*
//! constraint := "!"? ("<<" | "<") operand
//! operand    := node | "(" pattern ")"
//! node       := descriptor ("=" capture_name)?
//! descriptor := "__" | IDENT ("|" IDENT)* | "/" REGEX "/"
//! ```
//!
//! `A < B` holds when a child of `A` matches `B`; `A << B` when a proper
//! descendant does. All constraints following a node are anchored at that
//! node, so `VP < VBD < NP` requires both children of the same `VP`.
//! Matchers applied to leaves compare against the token text
//! case-insensitively, which lets `/VB.?/ < have|has` match auxiliaries by
//! word form.
//!
//! Only dominance relations are supported. Sister and precedence relations
//! would slot in as further [`Relation`] variants with their own candidate
//! sets in the matcher.

mod matcher;
mod parser;

use std::fmt;

use regex::Regex;

pub use matcher::{match_all, IndexedTree, MatchResult, NodeRef};
pub use parser::compile;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("duplicate capture name {0:?}")]
    DuplicateCapture(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `<`
    ImmediatelyDominates,
    /// `<<`
    Dominates,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::ImmediatelyDominates => "<",
            Relation::Dominates => "<<",
        })
    }
}

#[derive(Debug, Clone)]
pub enum Descriptor {
    Wildcard,
    Exact(String),
    Alternation(Vec<String>),
    Regex {
        source: String,
        full: Regex,
        folded: Regex,
    },
}

impl Descriptor {
    pub(crate) fn regex(source: &str) -> Result<Descriptor, regex::Error> {
        Ok(Descriptor::Regex {
            source: source.to_string(),
            full: Regex::new(&format!("^(?:{source})$"))?,
            folded: Regex::new(&format!("(?i)^(?:{source})$"))?,
        })
    }

    /// Matches a node label; leaf labels (token text) compare case-insensitively.
    pub fn matches(&self, label: &str, is_leaf: bool) -> bool {
        match self {
            Descriptor::Wildcard => true,
            Descriptor::Exact(s) => {
                if is_leaf {
                    s.to_lowercase() == label.to_lowercase()
                } else {
                    s == label
                }
            }
            Descriptor::Alternation(options) => options.iter().any(|s| {
                if is_leaf {
                    s.to_lowercase() == label.to_lowercase()
                } else {
                    s == label
                }
            }),
            Descriptor::Regex { full, folded, .. } => {
                if is_leaf {
                    folded.is_match(label)
                } else {
                    full.is_match(label)
                }
            }
        }
    }
}

impl PartialEq for Descriptor {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Descriptor::Wildcard, Descriptor::Wildcard) => true,
            (Descriptor::Exact(a), Descriptor::Exact(b)) => a == b,
            (Descriptor::Alternation(a), Descriptor::Alternation(b)) => a == b,
            (Descriptor::Regex { source: a, .. }, Descriptor::Regex { source: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Wildcard => f.write_str("__"),
            Descriptor::Exact(s) => f.write_str(s),
            Descriptor::Alternation(options) => f.write_str(&options.join("|")),
            Descriptor::Regex { source, .. } => write!(f, "/{source}/"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeMatcher {
    pub descriptor: Descriptor,
    pub capture: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub relation: Relation,
    pub negated: bool,
    pub operand: Pattern,
}

/// A compiled pattern: a root matcher plus constraints anchored at it.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub root: NodeMatcher,
    pub constraints: Vec<Constraint>,
}

impl Pattern {
    /// Capture names in declaration (pre-order) order.
    pub fn captures(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_captures(&mut out);
        out
    }

    fn collect_captures<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Some(name) = &self.root.capture {
            out.push(name);
        }
        for c in &self.constraints {
            c.operand.collect_captures(out);
        }
    }

    /// Nesting depth; a bare node has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .constraints
            .iter()
            .map(|c| c.operand.depth())
            .max()
            .unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .constraints
            .iter()
            .map(|c| c.operand.node_count())
            .sum::<usize>()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root.descriptor)?;
        if let Some(name) = &self.root.capture {
            write!(f, "={name}")?;
        }
        for c in &self.constraints {
            f.write_str(" ")?;
            if c.negated {
                f.write_str("!")?;
            }
            write!(f, "{} ", c.relation)?;
            if c.operand.constraints.is_empty() {
                write!(f, "{}", c.operand)?;
            } else {
                write!(f, "({})", c.operand)?;
            }
        }
        Ok(())
    }
}
