use std::fmt;

use serde::{Deserialize, Serialize};

/// Inclusive token index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        TokenSpan { start, end }
    }

    pub fn single(index: usize) -> Self {
        TokenSpan {
            start: index,
            end: index,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }

    pub fn overlaps(&self, other: &TokenSpan) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Smallest span covering both.
    pub fn cover(&self, other: &TokenSpan) -> TokenSpan {
        TokenSpan {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

/// A constituency tree node. Leaves carry the token text as their label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub label: String,
    pub children: Vec<ParseNode>,
    pub span: TokenSpan,
}

impl ParseNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// A node whose only child is a leaf, i.e. a POS tag.
    pub fn is_preterminal(&self) -> bool {
        self.children.len() == 1 && self.children[0].is_leaf()
    }

    pub fn leaves(&self) -> Vec<&ParseNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ParseNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for child in &self.children {
                child.collect_leaves(out);
            }
        }
    }

    /// Nodes in pre-order, root first.
    pub fn preorder(&self) -> Vec<&ParseNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ParseNode::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ParseNode::depth).max().unwrap_or(0)
    }

    /// Preterminal labels (POS tags) of the leaves, left to right.
    pub fn pos_tags(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_tags(&mut out);
        out
    }

    fn collect_tags<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_preterminal() {
            out.push(&self.label);
        } else {
            for child in &self.children {
                child.collect_tags(out);
            }
        }
    }

    /// Rebuilds spans left to right from `first`, returning the next free index.
    fn assign_spans(&mut self, first: usize) -> usize {
        if self.is_leaf() {
            self.span = TokenSpan::single(first);
            return first + 1;
        }
        let mut next = first;
        for child in &mut self.children {
            next = child.assign_spans(next);
        }
        self.span = TokenSpan::new(first, next - 1);
        next
    }
}

impl fmt::Display for ParseNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            return f.write_str(&self.label);
        }
        write!(f, "({}", self.label)?;
        for child in &self.children {
            write!(f, " {child}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("unbalanced parentheses at byte {position}")]
    UnbalancedParens { position: usize },
    #[error("empty node at byte {position}")]
    EmptyNode { position: usize },
    #[error("trailing input at byte {position}")]
    TrailingInput { position: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(source: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let bytes = source.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push((i, Tok::Open));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::Close));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                {
                    i += 1;
                }
                out.push((start, Tok::Atom(&source[start..i])));
            }
        }
    }
    out
}

/// Parses one Penn-style bracketing such as `(NP (DT the) (NN dog))`.
///
/// A PTB-style unlabeled wrapper `( (S ...) )` is unwrapped. Leaves are
/// assigned token spans left to right starting at 0.
pub fn parse_bracketed(source: &str) -> Result<ParseNode, TreeError> {
    let toks = lex(source);
    let mut pos = 0;
    let mut root = parse_node(&toks, &mut pos, source.len())?;
    if pos < toks.len() {
        return Err(TreeError::TrailingInput {
            position: toks[pos].0,
        });
    }
    if root.label.is_empty() {
        if root.children.len() == 1 {
            root = root.children.pop().expect("one child");
        } else {
            return Err(TreeError::EmptyNode { position: 0 });
        }
    }
    root.assign_spans(0);
    Ok(root)
}

fn parse_node(toks: &[(usize, Tok<'_>)], pos: &mut usize, eof: usize) -> Result<ParseNode, TreeError> {
    let Some(&(open_at, tok)) = toks.get(*pos) else {
        return Err(TreeError::UnbalancedParens { position: eof });
    };
    match tok {
        Tok::Atom(_) | Tok::Close => Err(TreeError::UnbalancedParens { position: open_at }),
        Tok::Open => {
            *pos += 1;
            let label = match toks.get(*pos) {
                Some(&(_, Tok::Atom(label))) => {
                    *pos += 1;
                    label.to_string()
                }
                // unlabeled wrapper, only meaningful at the root
                Some(&(_, Tok::Open)) => String::new(),
                Some(&(at, Tok::Close)) => return Err(TreeError::EmptyNode { position: at }),
                None => return Err(TreeError::UnbalancedParens { position: eof }),
            };
            let mut children = Vec::new();
            loop {
                match toks.get(*pos) {
                    None => return Err(TreeError::UnbalancedParens { position: eof }),
                    Some(&(_, Tok::Close)) => {
                        *pos += 1;
                        break;
                    }
                    Some(&(_, Tok::Open)) => children.push(parse_node(toks, pos, eof)?),
                    Some(&(_, Tok::Atom(word))) => {
                        *pos += 1;
                        children.push(ParseNode {
                            label: word.to_string(),
                            children: Vec::new(),
                            span: TokenSpan::single(0),
                        });
                    }
                }
            }
            if children.is_empty() {
                return Err(TreeError::EmptyNode { position: open_at });
            }
            Ok(ParseNode {
                label,
                children,
                span: TokenSpan::single(0),
            })
        }
    }
}
