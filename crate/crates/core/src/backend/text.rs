//! The textual query format: parenthesized infix `and`/`or` over atoms
//! `<lin> <rel> <const>` with variables `X<i>` and `Y<j>`.

use thiserror::Error;

use crate::query::{render_tree, Assertion, Query, Rel, ScalarLinear, Tree};
use crate::rational::{parse_rational, Rational};

use super::MetaNetwork;

pub fn render_query(meta: &MetaNetwork, q: &Query) -> String {
    render_tree(q, &|v| meta.var_name(v))
}

/// A single solver query made of conjuncts only.
pub fn render_conjunction(meta: &MetaNetwork, atoms: &[Assertion]) -> String {
    let parts: Vec<String> = atoms.iter().map(|a| format!("({})", a.render(&|v| meta.var_name(v)))).collect();
    parts.join(" and ")
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("query text, offset {offset}: {message}")]
pub struct FormatError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    And,
    Or,
    Plus,
    Star,
    Rel(Rel),
    Num(Rational),
    Var(char, usize),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, FormatError> {
    let err = |offset, message: &str| FormatError { offset, message: message.to_string() };
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => out.push((start, Tok::Open)),
            ')' => out.push((start, Tok::Close)),
            '+' => out.push((start, Tok::Plus)),
            '*' => out.push((start, Tok::Star)),
            '=' | '<' | '>' => {
                let two = text.get(i..i + 2);
                let (rel, len) = match (c, two) {
                    (_, Some("==")) => (Rel::Eq, 2),
                    (_, Some("<=")) => (Rel::Le, 2),
                    (_, Some(">=")) => (Rel::Ge, 2),
                    ('<', _) => (Rel::Lt, 1),
                    ('>', _) => (Rel::Gt, 1),
                    _ => return Err(err(start, "expected a relation")),
                };
                out.push((start, Tok::Rel(rel)));
                i += len;
                continue;
            }
            'X' | 'Y' => {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let index = text[start + 1..i].parse().map_err(|_| err(start, "expected a variable index"))?;
                out.push((start, Tok::Var(c, index)));
                continue;
            }
            'a'..='z' => {
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                    i += 1;
                }
                match &text[start..i] {
                    "and" => out.push((start, Tok::And)),
                    "or" => out.push((start, Tok::Or)),
                    _ => return Err(err(start, "unknown keyword")),
                }
                continue;
            }
            '-' | '0'..='9' | '.' => {
                i += 1;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.' || bytes[i] == b'/') {
                    i += 1;
                }
                let q = parse_rational(&text[start..i]).ok_or_else(|| err(start, "malformed number"))?;
                out.push((start, Tok::Num(q)));
                continue;
            }
            _ => return Err(err(start, "unexpected character")),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'m> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    meta: &'m MetaNetwork,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn fail<T>(&self, message: &str) -> Result<T, FormatError> {
        Err(FormatError { offset: self.offset(), message: message.to_string() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// `group (op group)*` with a single connective per level.
    fn tree(&mut self) -> Result<Query, FormatError> {
        let mut parts = vec![self.group()?];
        let mut op = None;
        while let Some(t @ (Tok::And | Tok::Or)) = self.peek().cloned() {
            if op.as_ref().is_some_and(|o| *o != t) {
                return self.fail("mixed `and`/`or` need parentheses");
            }
            op = Some(t);
            self.pos += 1;
            parts.push(self.group()?);
        }
        let last = parts.pop().unwrap();
        Ok(parts.into_iter().rev().fold(last, |acc, p| match op {
            Some(Tok::Or) => Tree::disj(p, acc),
            _ => Tree::conj(p, acc),
        }))
    }

    fn group(&mut self) -> Result<Query, FormatError> {
        if !self.eat(&Tok::Open) {
            return self.fail("expected `(`");
        }
        let inner = if self.peek() == Some(&Tok::Open) { self.tree()? } else { Tree::Atom(self.atom()?) };
        if !self.eat(&Tok::Close) {
            return self.fail("expected `)`");
        }
        Ok(inner)
    }

    fn atom(&mut self) -> Result<Assertion, FormatError> {
        let lhs = self.sum()?;
        let Some(Tok::Rel(rel)) = self.peek().cloned() else {
            return self.fail("expected a relation");
        };
        self.pos += 1;
        let rhs = self.sum()?;
        Ok(Assertion::relation(&lhs, rel, &rhs))
    }

    fn sum(&mut self) -> Result<ScalarLinear, FormatError> {
        let mut acc = self.term()?;
        while self.eat(&Tok::Plus) {
            acc = acc.plus(&self.term()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ScalarLinear, FormatError> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                if self.eat(&Tok::Star) {
                    Ok(self.variable()?.scale(&q))
                } else {
                    Ok(ScalarLinear::constant(q))
                }
            }
            Some(Tok::Var(..)) => self.variable(),
            _ => self.fail("expected a number or variable"),
        }
    }

    fn variable(&mut self) -> Result<ScalarLinear, FormatError> {
        let Some(Tok::Var(kind, index)) = self.peek().cloned() else {
            return self.fail("expected a variable");
        };
        let id = match kind {
            'X' if index < self.meta.total_inputs() => index,
            'Y' if index < self.meta.total_outputs() => self.meta.total_inputs() + index,
            _ => return self.fail("variable index out of range"),
        };
        self.pos += 1;
        Ok(ScalarLinear::scalar_var(id))
    }
}

/// Parses a query file back into a tree over the global variables of `meta`.
pub fn parse_query(meta: &MetaNetwork, text: &str) -> Result<Query, FormatError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, meta, end: text.len() };
    let q = p.tree()?;
    if p.pos != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(q)
}
