use std::collections::HashSet;

use super::{Constraint, Descriptor, NodeMatcher, Pattern, QueryError, Relation};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Bang,
    Lt,
    LtLt,
    Eq,
    Pipe,
    Wildcard,
    Ident(String),
    Regex(String),
    Eof,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

fn lex(source: &str) -> Result<Vec<(usize, Tok)>, QueryError> {
    let chars: Vec<(usize, char)> = source.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((at, Tok::Open));
                i += 1;
            }
            ')' => {
                out.push((at, Tok::Close));
                i += 1;
            }
            '!' => {
                out.push((at, Tok::Bang));
                i += 1;
            }
            '=' => {
                out.push((at, Tok::Eq));
                i += 1;
            }
            '|' => {
                out.push((at, Tok::Pipe));
                i += 1;
            }
            '<' => {
                if chars.get(i + 1).map(|&(_, c)| c) == Some('<') {
                    out.push((at, Tok::LtLt));
                    i += 2;
                } else {
                    out.push((at, Tok::Lt));
                    i += 1;
                }
            }
            '_' => {
                if chars.get(i + 1).map(|&(_, c)| c) == Some('_') {
                    out.push((at, Tok::Wildcard));
                    i += 2;
                } else {
                    return Err(QueryError::SyntaxError {
                        position: at,
                        expected: "`__` wildcard".into(),
                    });
                }
            }
            '/' => {
                let mut body = String::new();
                let mut j = i + 1;
                let mut closed = false;
                while j < chars.len() {
                    let (_, d) = chars[j];
                    if d == '\\' && j + 1 < chars.len() {
                        body.push(d);
                        body.push(chars[j + 1].1);
                        j += 2;
                        continue;
                    }
                    if d == '/' {
                        closed = true;
                        break;
                    }
                    body.push(d);
                    j += 1;
                }
                if !closed {
                    return Err(QueryError::SyntaxError {
                        position: source.len(),
                        expected: "closing `/` of regex".into(),
                    });
                }
                out.push((at, Tok::Regex(body)));
                i = j + 1;
            }
            c if is_ident_char(c) => {
                let mut j = i;
                let mut ident = String::new();
                while j < chars.len() && is_ident_char(chars[j].1) {
                    ident.push(chars[j].1);
                    j += 1;
                }
                out.push((at, Tok::Ident(ident)));
                i = j;
            }
            _ => {
                return Err(QueryError::SyntaxError {
                    position: at,
                    expected: "node descriptor, relation, or parenthesis".into(),
                })
            }
        }
    }
    out.push((source.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    captures: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn at(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> QueryError {
        QueryError::SyntaxError {
            position: self.at(),
            expected: expected.to_string(),
        }
    }

    fn pattern(&mut self, negated: bool) -> Result<Pattern, QueryError> {
        let root = self.node(negated)?;
        let mut constraints = Vec::new();
        loop {
            let neg = match self.peek() {
                Tok::Bang => {
                    self.bump();
                    true
                }
                Tok::Lt | Tok::LtLt => false,
                _ => break,
            };
            let relation = match self.bump() {
                Tok::Lt => Relation::ImmediatelyDominates,
                Tok::LtLt => Relation::Dominates,
                _ => {
                    self.pos -= 1;
                    return Err(self.error("`<` or `<<` after `!`"));
                }
            };
            let operand = self.operand(negated || neg)?;
            constraints.push(Constraint {
                relation,
                negated: neg,
                operand,
            });
        }
        Ok(Pattern { root, constraints })
    }

    fn operand(&mut self, negated: bool) -> Result<Pattern, QueryError> {
        if *self.peek() == Tok::Open {
            self.bump();
            let inner = self.pattern(negated)?;
            if *self.peek() != Tok::Close {
                return Err(self.error("`)` closing group"));
            }
            self.bump();
            Ok(inner)
        } else {
            Ok(Pattern {
                root: self.node(negated)?,
                constraints: Vec::new(),
            })
        }
    }

    fn node(&mut self, negated: bool) -> Result<NodeMatcher, QueryError> {
        let descriptor = match self.peek().clone() {
            Tok::Wildcard => {
                self.bump();
                Descriptor::Wildcard
            }
            Tok::Regex(source) => {
                let at = self.at();
                self.bump();
                Descriptor::regex(&source).map_err(|e| QueryError::SyntaxError {
                    position: at,
                    expected: format!("valid regex ({e})"),
                })?
            }
            Tok::Ident(first) => {
                self.bump();
                let mut options = vec![first];
                while *self.peek() == Tok::Pipe {
                    self.bump();
                    match self.bump() {
                        Tok::Ident(next) => options.push(next),
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("identifier after `|`"));
                        }
                    }
                }
                if options.len() == 1 {
                    Descriptor::Exact(options.pop().expect("one option"))
                } else {
                    Descriptor::Alternation(options)
                }
            }
            _ => return Err(self.error("node descriptor")),
        };
        let mut capture = None;
        if *self.peek() == Tok::Eq {
            if negated {
                return Err(self.error("no capture inside a negated constraint"));
            }
            self.bump();
            match self.bump() {
                Tok::Ident(name) => {
                    if !self.captures.insert(name.clone()) {
                        return Err(QueryError::DuplicateCapture(name));
                    }
                    capture = Some(name);
                }
                _ => {
                    self.pos -= 1;
                    return Err(self.error("capture name after `=`"));
                }
            }
        }
        Ok(NodeMatcher {
            descriptor,
            capture,
        })
    }
}

/// Compiles a pattern string.
pub fn compile(source: &str) -> Result<Pattern, QueryError> {
    let mut parser = Parser {
        toks: lex(source)?,
        pos: 0,
        captures: HashSet::new(),
    };
    let pattern = parser.pattern(false)?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error("`<`, `<<`, `!` or end of pattern"));
    }
    Ok(pattern)
}
