//! Surface syntax tree produced by the parser, with a precedence-aware
//! pretty-printer. Names are still textual here; scoping happens during type
//! checking.

use std::fmt;

use super::types::Type;

/// Start position of a token or term (1-based line and column).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Neq,
    Le,
    Lt,
    Ge,
    Gt,
    VecEq,
    Add,
    Sub,
    VecAdd,
    Mul,
    At,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "==",
            BinOp::Neq => "!=",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::VecEq => ".==.",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::VecAdd => ".+.",
            BinOp::Mul => "*",
            BinOp::At => "!",
        }
    }

    fn level(self) -> u8 {
        match self {
            BinOp::Or => level::OR,
            BinOp::And => level::AND,
            BinOp::Eq | BinOp::Neq | BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt | BinOp::VecEq => level::CMP,
            BinOp::Add | BinOp::Sub | BinOp::VecAdd => level::ADD,
            BinOp::Mul => level::MUL,
            BinOp::At => level::AT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Map,
    Fold,
    ZipWith,
}

impl Builtin {
    pub fn arity(self) -> usize {
        match self {
            Builtin::Map => 2,
            Builtin::Fold | Builtin::ZipWith => 3,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Builtin::Map => "map",
            Builtin::Fold => "fold",
            Builtin::ZipWith => "zipWith",
        }
    }
}

/// One or more names sharing an optional type annotation: `a`, `(a b : Real)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinderGroup {
    pub names: Vec<String>,
    pub ty: Option<Type>,
    pub span: Span,
}

/// A surface term. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
    Var(String),
    /// Numeric literal, kept as written so printing reproduces the source.
    Num(String),
    Bool(bool),
    Vec(Vec<Term>),
    App(Box<Term>, Vec<Term>),
    Builtin(Builtin, Vec<Term>),
    Binary(BinOp, Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Not(Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    Lam(Vec<BinderGroup>, Box<Term>),
    Quant(Quantifier, Vec<BinderGroup>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Network { name: String, ty: Type, span: Span },
    Property { name: String, body: Term, span: Span },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Network { name, .. } | Decl::Property { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::Network { span, .. } | Decl::Property { span, .. } => *span,
        }
    }
}

pub(crate) mod level {
    pub const PREFIX: u8 = 0;
    pub const OR: u8 = 1;
    pub const AND: u8 = 2;
    pub const NOT: u8 = 3;
    pub const CMP: u8 = 4;
    pub const ADD: u8 = 5;
    pub const MUL: u8 = 6;
    pub const NEG: u8 = 7;
    pub const AT: u8 = 8;
    pub const APP: u8 = 9;
    pub const ATOM: u8 = 10;
}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Term {
        Term { kind, span }
    }

    fn level(&self) -> u8 {
        match &self.kind {
            TermKind::Var(_) | TermKind::Bool(_) | TermKind::Vec(_) => level::ATOM,
            TermKind::Num(text) => {
                if text.starts_with('-') {
                    level::NEG
                } else {
                    level::ATOM
                }
            }
            TermKind::App(..) | TermKind::Builtin(..) => level::APP,
            TermKind::Binary(op, ..) => op.level(),
            TermKind::Neg(_) => level::NEG,
            TermKind::Not(_) => level::NOT,
            TermKind::If(..) | TermKind::Lam(..) | TermKind::Quant(..) => level::PREFIX,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let parens = self.level() < ctx;
        if parens {
            write!(f, "(")?;
        }
        match &self.kind {
            TermKind::Var(name) => write!(f, "{name}")?,
            TermKind::Num(text) => write!(f, "{text}")?,
            TermKind::Bool(b) => write!(f, "{b}")?,
            TermKind::Vec(elems) => {
                write!(f, "[")?;
                for (i, e) in elems.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    e.fmt_at(f, level::PREFIX)?;
                }
                write!(f, "]")?;
            }
            TermKind::App(head, args) => {
                head.fmt_at(f, level::ATOM)?;
                for a in args {
                    write!(f, " ")?;
                    a.fmt_at(f, level::ATOM)?;
                }
            }
            TermKind::Builtin(b, args) => {
                write!(f, "{}", b.keyword())?;
                for a in args {
                    write!(f, " ")?;
                    a.fmt_at(f, level::ATOM)?;
                }
            }
            TermKind::Binary(op, l, r) => {
                let lv = op.level();
                let (left_ctx, right_ctx) = match op {
                    BinOp::Or | BinOp::And => (lv + 1, lv),
                    BinOp::Add | BinOp::Sub | BinOp::VecAdd | BinOp::Mul | BinOp::At => (lv, lv + 1),
                    _ => (lv + 1, lv + 1),
                };
                l.fmt_at(f, left_ctx)?;
                write!(f, " {} ", op.symbol())?;
                r.fmt_at(f, right_ctx)?;
            }
            TermKind::Neg(t) => {
                // `-5` would re-lex as a literal, so a leading digit needs parens
                let inner = Printed(t, level::AT).to_string();
                if inner.starts_with(|c: char| c.is_ascii_digit()) {
                    write!(f, "-({inner})")?;
                } else {
                    write!(f, "-{inner}")?;
                }
            }
            TermKind::Not(t) => {
                write!(f, "not ")?;
                t.fmt_at(f, level::NOT)?;
            }
            TermKind::If(c, t, e) => {
                write!(f, "if ")?;
                c.fmt_at(f, level::PREFIX)?;
                write!(f, " then ")?;
                t.fmt_at(f, level::PREFIX)?;
                write!(f, " else ")?;
                e.fmt_at(f, level::PREFIX)?;
            }
            TermKind::Lam(groups, body) => {
                write!(f, "\\")?;
                fmt_groups(f, groups)?;
                write!(f, " -> ")?;
                body.fmt_at(f, level::PREFIX)?;
            }
            TermKind::Quant(q, groups, body) => {
                write!(f, "{} ", if *q == Quantifier::Forall { "forall" } else { "exists" })?;
                fmt_groups(f, groups)?;
                write!(f, " . ")?;
                body.fmt_at(f, level::PREFIX)?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

struct Printed<'a>(&'a Term, u8);

impl fmt::Display for Printed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_at(f, self.1)
    }
}

fn fmt_groups(f: &mut fmt::Formatter<'_>, groups: &[BinderGroup]) -> fmt::Result {
    for (i, g) in groups.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        match &g.ty {
            Some(ty) => write!(f, "({} : {})", g.names.join(" "), ty)?,
            None => write!(f, "{}", g.names.join(" "))?,
        }
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, level::PREFIX)
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Network { name, ty, .. } => write!(f, "@network {name} : {ty}"),
            Decl::Property { name, body, .. } => write!(f, "@property {name} = {body}"),
        }
    }
}

/// Renders a whole program, one declaration per line.
pub fn pretty_program(decls: &[Decl]) -> String {
    let mut out = String::new();
    for d in decls {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}
