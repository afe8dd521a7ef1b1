//! Brute-force oracles shared by the oracle tests and the acceptance suite.

use qgen_core::corpus::{levenshtein, parse_bracketed, ParseNode};
use qgen_core::seed;
use qgen_core::treequery::{compile, match_all, Descriptor, Pattern, Relation};
use rand::seq::SliceRandom;
use rand::Rng;
use regex::Regex;

const PHRASES: &[&str] = &["S", "NP", "VP", "PP"];
const TAGS: &[&str] = &["NN", "NNS", "VB", "VBD", "VBN", "DT", "IN"];
const WORDS: &[&str] = &["a", "the", "have", "Has", "dog", "ran"];

pub fn random_tree(rng: &mut seed::Rng, budget: usize) -> String {
    // a preterminal plus its leaf costs two nodes
    if budget < 4 || rng.gen_bool(0.3) {
        return format!("({} {})", TAGS.choose(rng).unwrap(), WORDS.choose(rng).unwrap());
    }
    let mut left = budget - 1;
    let mut kids = Vec::new();
    while left >= 2 && (kids.is_empty() || rng.gen_bool(0.6)) && kids.len() < 3 {
        let take = rng.gen_range(2..=left.min(7));
        let kid = random_tree(rng, take);
        left -= count_nodes(&kid);
        kids.push(kid);
    }
    format!("({} {})", PHRASES.choose(rng).unwrap(), kids.join(" "))
}

fn count_nodes(bracketed: &str) -> usize {
    parse_bracketed(bracketed).unwrap().node_count()
}

fn random_descriptor(rng: &mut seed::Rng) -> String {
    let labels: Vec<&str> = PHRASES.iter().chain(TAGS).chain(WORDS).copied().collect();
    match rng.gen_range(0..10) {
        0 | 1 => "__".into(),
        2 | 3 => {
            let a = labels.choose(rng).unwrap();
            let b = labels.choose(rng).unwrap();
            format!("{a}|{b}")
        }
        4 => ["/VB.?/", "/N.*/", "/[A-Z]+P/", "/ha(ve|s)/"].choose(rng).unwrap().to_string(),
        _ => labels.choose(rng).unwrap().to_string(),
    }
}

pub fn random_pattern(rng: &mut seed::Rng, depth: usize, negated: bool, next_cap: &mut usize) -> String {
    let mut s = random_descriptor(rng);
    if !negated && rng.gen_bool(0.4) {
        s.push_str(&format!("=c{next_cap}"));
        *next_cap += 1;
    }
    if depth > 1 {
        for _ in 0..rng.gen_range(0..=2) {
            let neg = rng.gen_bool(0.25);
            let rel = if rng.gen_bool(0.5) { "<" } else { "<<" };
            let inner = random_pattern(rng, depth - 1, negated || neg, next_cap);
            s.push_str(&format!(" {}{rel} ({inner})", if neg { "!" } else { "" }));
        }
    }
    s
}

/// Tree flattened to parent pointers.
struct Flat<'t> {
    nodes: Vec<&'t ParseNode>,
    parent: Vec<Option<usize>>,
}

impl<'t> Flat<'t> {
    fn new(root: &'t ParseNode) -> Self {
        let mut f = Flat {
            nodes: Vec::new(),
            parent: Vec::new(),
        };
        f.push(root, None);
        f
    }

    fn push(&mut self, node: &'t ParseNode, parent: Option<usize>) {
        let me = self.nodes.len();
        self.nodes.push(node);
        self.parent.push(parent);
        for c in &node.children {
            self.push(c, Some(me));
        }
    }

    fn related(&self, anchor: usize, rel: Relation, other: usize) -> bool {
        match rel {
            Relation::ImmediatelyDominates => self.parent[other] == Some(anchor),
            Relation::Dominates => {
                let mut at = self.parent[other];
                while let Some(p) = at {
                    if p == anchor {
                        return true;
                    }
                    at = self.parent[p];
                }
                false
            }
        }
    }

    fn label_ok(&self, d: &Descriptor, i: usize) -> bool {
        let node = self.nodes[i];
        let leaf = node.children.is_empty();
        let label = if leaf { node.label.to_lowercase() } else { node.label.clone() };
        let norm = |s: &str| if leaf { s.to_lowercase() } else { s.to_string() };
        match d {
            Descriptor::Wildcard => true,
            Descriptor::Exact(s) => norm(s) == label,
            Descriptor::Alternation(v) => v.iter().any(|s| norm(s) == label),
            Descriptor::Regex { source, .. } => {
                let flags = if leaf { "(?i)" } else { "" };
                Regex::new(&format!("{flags}^(?:{source})$")).unwrap().is_match(&node.label)
            }
        }
    }

    /// Every full assignment of pattern nodes (pre-order) with the root at `at`.
    fn assignments(&self, p: &Pattern, at: usize) -> Vec<Vec<(Option<String>, usize)>> {
        if !self.label_ok(&p.root.descriptor, at) {
            return vec![];
        }
        let mut partial = vec![vec![(p.root.capture.clone(), at)]];
        for c in &p.constraints {
            if c.negated {
                let blocked = (0..self.nodes.len())
                    .any(|y| self.related(at, c.relation, y) && !self.assignments(&c.operand, y).is_empty());
                if blocked {
                    return vec![];
                }
                continue;
            }
            let mut next = Vec::new();
            for left in &partial {
                for y in 0..self.nodes.len() {
                    if !self.related(at, c.relation, y) {
                        continue;
                    }
                    for right in self.assignments(&c.operand, y) {
                        let mut m = left.clone();
                        m.extend(right);
                        next.push(m);
                    }
                }
            }
            partial = next;
        }
        partial
    }
}

pub fn brute(tree: &ParseNode, p: &Pattern) -> Vec<(usize, Vec<usize>)> {
    let flat = Flat::new(tree);
    let names: Vec<&str> = p.captures();
    let mut out = Vec::new();
    for root in 0..flat.nodes.len() {
        for a in flat.assignments(p, root) {
            let caps: Vec<usize> = names
                .iter()
                .map(|n| a.iter().find(|(c, _)| c.as_deref() == Some(*n)).unwrap().1)
                .collect();
            out.push((root, caps));
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn lev_brute(a: &[char], b: &[char]) -> usize {
    match (a, b) {
        ([], _) => b.len(),
        (_, []) => a.len(),
        ([x, ra @ ..], [y, rb @ ..]) => {
            let sub = lev_brute(ra, rb) + usize::from(x != y);
            sub.min(lev_brute(ra, b) + 1).min(lev_brute(a, rb) + 1)
        }
    }
}

/// Tree-query cases checked and how many had at least one match.
pub struct TreeOracleRun {
    pub trees: usize,
    pub cases: usize,
    pub nonempty: usize,
}

/// Compares `match_all` with [`brute`] on random trees of at most 15 nodes
/// and random patterns of depth at most 3.
pub fn tree_oracle(trees: usize, patterns_per_tree: usize, rng_seed: u64) -> Result<TreeOracleRun, String> {
    let mut rng = seed::rng(rng_seed);
    let mut run = TreeOracleRun { trees: 0, cases: 0, nonempty: 0 };
    while run.trees < trees {
        let budget = rng.gen_range(3..=15);
        let src = random_tree(&mut rng, budget);
        let tree = parse_bracketed(&src).map_err(|e| format!("{src}: {e}"))?;
        if tree.node_count() > 15 {
            return Err(format!("tree over budget: {src}"));
        }
        run.trees += 1;
        for _ in 0..patterns_per_tree {
            let mut caps = 0;
            let depth = rng.gen_range(1..=3);
            let text = random_pattern(&mut rng, depth, false, &mut caps);
            let pattern = compile(&text).map_err(|e| format!("{text}: {e}"))?;
            if pattern.depth() > 3 {
                return Err(format!("pattern too deep: {text}"));
            }
            let got: Vec<(usize, Vec<usize>)> = match_all(&tree, &pattern)
                .iter()
                .map(|m| (m.root.index, m.captures.iter().map(|(_, n)| n.index).collect()))
                .collect();
            let want = brute(&tree, &pattern);
            if got != want {
                return Err(format!("tree {src}\npattern {text}\ngot {got:?}\nwant {want:?}"));
            }
            run.cases += 1;
            run.nonempty += usize::from(!want.is_empty());
        }
    }
    Ok(run)
}

/// Compares `levenshtein` with [`lev_brute`] on random strings of length <= 7.
pub fn levenshtein_oracle(pairs: usize, rng_seed: u64) -> Result<usize, String> {
    let mut rng = seed::rng(rng_seed);
    let alphabet = ['a', 'b', 'c', 'é'];
    let word = |rng: &mut seed::Rng| -> String {
        let n = rng.gen_range(0..=7);
        (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect()
    };
    for _ in 0..pairs {
        let (a, b) = (word(&mut rng), word(&mut rng));
        let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let (got, want) = (levenshtein(&a, &b), lev_brute(&ca, &cb));
        if got != want {
            return Err(format!("{a:?} vs {b:?}: got {got}, want {want}"));
        }
    }
    Ok(pairs)
}
