//! Elaborated core language: de Bruijn indexed, every overloaded surface
//! operator resolved to its typed builtin.

use std::fmt;
use std::sync::Arc;

use super::types::Type;
use crate::rational::{format_rational_plain, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Binder {
    pub name: String,
    pub ty: Type,
}

impl Binder {
    pub fn new(name: impl Into<String>, ty: Type) -> Binder {
        Binder { name: name.into(), ty }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderOp {
    Le,
    Lt,
    Ge,
    Gt,
}

#[allow(clippy::should_implement_trait)]
impl OrderOp {
    /// The relation that holds exactly when this one fails.
    pub fn neg(self) -> OrderOp {
        match self {
            OrderOp::Le => OrderOp::Gt,
            OrderOp::Lt => OrderOp::Ge,
            OrderOp::Ge => OrderOp::Lt,
            OrderOp::Gt => OrderOp::Le,
        }
    }

    /// The relation with its operands swapped.
    pub fn flip(self) -> OrderOp {
        match self {
            OrderOp::Le => OrderOp::Ge,
            OrderOp::Lt => OrderOp::Gt,
            OrderOp::Ge => OrderOp::Le,
            OrderOp::Gt => OrderOp::Lt,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, OrderOp::Lt | OrderOp::Gt)
    }

    pub fn holds(self, x: &Rational, y: &Rational) -> bool {
        match self {
            OrderOp::Le => x <= y,
            OrderOp::Lt => x < y,
            OrderOp::Ge => x >= y,
            OrderOp::Gt => x > y,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OrderOp::Le => "<=",
            OrderOp::Lt => "<",
            OrderOp::Ge => ">=",
            OrderOp::Gt => ">",
        }
    }
}

pub type Ix = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Lam(Binder, Arc<Expr>),
    App(Arc<Expr>, Arc<Expr>),
    Var(Ix),
    Real(Rational),
    Bool(bool),
    Index(u64),
    Add(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    And(Arc<Expr>, Arc<Expr>),
    Or(Arc<Expr>, Arc<Expr>),
    Not(Arc<Expr>),
    /// Equality at type Real or Index.
    Eq(Arc<Expr>, Arc<Expr>),
    Neq(Arc<Expr>, Arc<Expr>),
    Order(OrderOp, Arc<Expr>, Arc<Expr>),
    If(Arc<Expr>, Arc<Expr>, Arc<Expr>),
    Forall(Binder, Arc<Expr>),
    Exists(Binder, Arc<Expr>),
    Vec(Vec<Expr>),
    At(Arc<Expr>, Arc<Expr>),
    VecAdd(Arc<Expr>, Arc<Expr>),
    /// Equality of two `Vector Real n` values; `n` is the size.
    VecEq(u64, Arc<Expr>, Arc<Expr>),
    Map(Arc<Expr>, Arc<Expr>),
    Fold(Arc<Expr>, Arc<Expr>, Arc<Expr>),
    /// `zipWith f xs ys` over vectors of the given size.
    ZipWith(u64, Arc<Expr>, Arc<Expr>, Arc<Expr>),
    NetworkApp(String, Arc<Expr>),
}

fn a(e: Expr) -> Arc<Expr> {
    Arc::new(e)
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn lam(binder: Binder, body: Expr) -> Expr {
        Expr::Lam(binder, a(body))
    }
    pub fn app(f: Expr, x: Expr) -> Expr {
        Expr::App(a(f), a(x))
    }
    pub fn add(x: Expr, y: Expr) -> Expr {
        Expr::Add(a(x), a(y))
    }
    pub fn mul(x: Expr, y: Expr) -> Expr {
        Expr::Mul(a(x), a(y))
    }
    pub fn and(x: Expr, y: Expr) -> Expr {
        Expr::And(a(x), a(y))
    }
    pub fn or(x: Expr, y: Expr) -> Expr {
        Expr::Or(a(x), a(y))
    }
    pub fn not(x: Expr) -> Expr {
        Expr::Not(a(x))
    }
    pub fn eq(x: Expr, y: Expr) -> Expr {
        Expr::Eq(a(x), a(y))
    }
    pub fn neq(x: Expr, y: Expr) -> Expr {
        Expr::Neq(a(x), a(y))
    }
    pub fn order(op: OrderOp, x: Expr, y: Expr) -> Expr {
        Expr::Order(op, a(x), a(y))
    }
    pub fn ite(c: Expr, x: Expr, y: Expr) -> Expr {
        Expr::If(a(c), a(x), a(y))
    }
    pub fn forall(binder: Binder, body: Expr) -> Expr {
        Expr::Forall(binder, a(body))
    }
    pub fn exists(binder: Binder, body: Expr) -> Expr {
        Expr::Exists(binder, a(body))
    }
    pub fn at(xs: Expr, i: Expr) -> Expr {
        Expr::At(a(xs), a(i))
    }
    pub fn vec_add(x: Expr, y: Expr) -> Expr {
        Expr::VecAdd(a(x), a(y))
    }
    pub fn vec_eq(n: u64, x: Expr, y: Expr) -> Expr {
        Expr::VecEq(n, a(x), a(y))
    }
    pub fn map(f: Expr, xs: Expr) -> Expr {
        Expr::Map(a(f), a(xs))
    }
    pub fn fold(f: Expr, e: Expr, xs: Expr) -> Expr {
        Expr::Fold(a(f), a(e), a(xs))
    }
    pub fn zip_with(n: u64, f: Expr, xs: Expr, ys: Expr) -> Expr {
        Expr::ZipWith(n, a(f), a(xs), a(ys))
    }
    pub fn network(name: impl Into<String>, x: Expr) -> Expr {
        Expr::NetworkApp(name.into(), a(x))
    }
    pub fn real(q: Rational) -> Expr {
        Expr::Real(q)
    }

    /// Number of nodes, used to bound random generation and in diagnostics.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Real(_) | Expr::Bool(_) | Expr::Index(_) => vec![],
            Expr::Lam(_, b) | Expr::Forall(_, b) | Expr::Exists(_, b) | Expr::Not(b) | Expr::NetworkApp(_, b) => {
                vec![b]
            }
            Expr::App(x, y)
            | Expr::Add(x, y)
            | Expr::Mul(x, y)
            | Expr::And(x, y)
            | Expr::Or(x, y)
            | Expr::Eq(x, y)
            | Expr::Neq(x, y)
            | Expr::Order(_, x, y)
            | Expr::At(x, y)
            | Expr::VecAdd(x, y)
            | Expr::VecEq(_, x, y)
            | Expr::Map(x, y) => vec![x, y],
            Expr::If(x, y, z) | Expr::Fold(x, y, z) | Expr::ZipWith(_, x, y, z) => vec![x, y, z],
            Expr::Vec(xs) => xs.iter().collect(),
        }
    }
}

/// Debug rendering with binder names, e.g. `forall (a : Real) . a#0 >= 0`.
/// Variables print as `name#index`; this is not meant to be re-parsed.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(e: &Expr, names: &mut Vec<String>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let bin = |f: &mut fmt::Formatter<'_>, names: &mut Vec<String>, op: &str, x: &Expr, y: &Expr| {
                write!(f, "(")?;
                go(x, names, f)?;
                write!(f, " {op} ")?;
                go(y, names, f)?;
                write!(f, ")")
            };
            match e {
                Expr::Var(i) => {
                    let name = names.len().checked_sub(i + 1).and_then(|k| names.get(k)).map(String::as_str);
                    write!(f, "{}#{}", name.unwrap_or("?"), i)
                }
                Expr::Real(q) => write!(f, "{}", format_rational_plain(q)),
                Expr::Bool(b) => write!(f, "{b}"),
                Expr::Index(i) => write!(f, "{i}i"),
                Expr::Lam(b, body) | Expr::Forall(b, body) | Expr::Exists(b, body) => {
                    let kw = match e {
                        Expr::Lam(..) => "\\",
                        Expr::Forall(..) => "forall ",
                        _ => "exists ",
                    };
                    write!(f, "({kw}({} : {}) {} ", b.name, b.ty, if matches!(e, Expr::Lam(..)) { "->" } else { "." })?;
                    names.push(b.name.clone());
                    let r = go(body, names, f);
                    names.pop();
                    r?;
                    write!(f, ")")
                }
                Expr::App(x, y) => bin(f, names, "$", x, y),
                Expr::Add(x, y) => bin(f, names, "+", x, y),
                Expr::Mul(x, y) => bin(f, names, "*", x, y),
                Expr::And(x, y) => bin(f, names, "and", x, y),
                Expr::Or(x, y) => bin(f, names, "or", x, y),
                Expr::Eq(x, y) => bin(f, names, "==", x, y),
                Expr::Neq(x, y) => bin(f, names, "!=", x, y),
                Expr::Order(op, x, y) => bin(f, names, op.symbol(), x, y),
                Expr::At(x, y) => bin(f, names, "!", x, y),
                Expr::VecAdd(x, y) => bin(f, names, ".+.", x, y),
                Expr::VecEq(_, x, y) => bin(f, names, ".==.", x, y),
                Expr::Not(x) => {
                    write!(f, "not ")?;
                    go(x, names, f)
                }
                Expr::If(c, x, y) => {
                    write!(f, "(if ")?;
                    go(c, names, f)?;
                    write!(f, " then ")?;
                    go(x, names, f)?;
                    write!(f, " else ")?;
                    go(y, names, f)?;
                    write!(f, ")")
                }
                Expr::Vec(xs) => {
                    write!(f, "[")?;
                    for (i, x) in xs.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        go(x, names, f)?;
                    }
                    write!(f, "]")
                }
                Expr::Map(g, xs) => {
                    write!(f, "(map ")?;
                    go(g, names, f)?;
                    write!(f, " ")?;
                    go(xs, names, f)?;
                    write!(f, ")")
                }
                Expr::Fold(g, e0, xs) | Expr::ZipWith(_, g, e0, xs) => {
                    write!(f, "({} ", if matches!(e, Expr::Fold(..)) { "fold" } else { "zipWith" })?;
                    go(g, names, f)?;
                    write!(f, " ")?;
                    go(e0, names, f)?;
                    write!(f, " ")?;
                    go(xs, names, f)?;
                    write!(f, ")")
                }
                Expr::NetworkApp(name, x) => {
                    write!(f, "({name} ")?;
                    go(x, names, f)?;
                    write!(f, ")")
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ScopeError {
    #[error("variable index {index} escapes its scope of depth {depth}")]
    Unbound { index: Ix, depth: usize },
    #[error("ill-typed core term: {0}")]
    IllTyped(String),
}

/// Reconstructs the type of a core term from its binder annotations. Doubles
/// as the scope audit: every index must be in range and every node well-typed.
pub fn type_of(
    ctx: &mut Vec<Type>,
    networks: &dyn Fn(&str) -> Option<(u64, u64)>,
    e: &Expr,
) -> Result<Type, ScopeError> {
    let ill = |msg: String| Err(ScopeError::IllTyped(msg));
    let real_vec = |n: u64| Type::real_vector(n);
    match e {
        Expr::Var(i) => {
            let depth = ctx.len();
            if *i >= depth {
                return Err(ScopeError::Unbound { index: *i, depth });
            }
            Ok(ctx[depth - 1 - i].clone())
        }
        Expr::Real(_) => Ok(Type::Real),
        Expr::Bool(_) => Ok(Type::Bool),
        Expr::Index(_) => ill("bare index literal has no size".into()),
        Expr::Lam(b, body) => {
            ctx.push(b.ty.clone());
            let t = type_of(ctx, networks, body);
            ctx.pop();
            Ok(Type::fun(b.ty.clone(), t?))
        }
        Expr::Forall(b, body) | Expr::Exists(b, body) => {
            if b.ty.is_function() {
                return ill(format!("quantifier over function type {}", b.ty));
            }
            ctx.push(b.ty.clone());
            let t = type_of(ctx, networks, body);
            ctx.pop();
            match t? {
                Type::Bool => Ok(Type::Bool),
                t => ill(format!("quantifier body has type {t}")),
            }
        }
        Expr::App(fun, x) => {
            let tf = type_of(ctx, networks, fun)?;
            let tx = type_of_at(ctx, networks, x, None)?;
            match tf {
                Type::Fun(d, c) if index_compatible(&d, &tx) => Ok(*c),
                t => ill(format!("cannot apply {t} to {tx}")),
            }
        }
        Expr::Add(x, y) | Expr::Mul(x, y) => {
            expect(ctx, networks, x, &Type::Real)?;
            expect(ctx, networks, y, &Type::Real)?;
            Ok(Type::Real)
        }
        Expr::And(x, y) | Expr::Or(x, y) => {
            expect(ctx, networks, x, &Type::Bool)?;
            expect(ctx, networks, y, &Type::Bool)?;
            Ok(Type::Bool)
        }
        Expr::Not(x) => {
            expect(ctx, networks, x, &Type::Bool)?;
            Ok(Type::Bool)
        }
        Expr::Eq(x, y) | Expr::Neq(x, y) => {
            let tx = type_of_at(ctx, networks, x, None)?;
            let ty = type_of_at(ctx, networks, y, Some(&tx))?;
            match (&tx, &ty) {
                (Type::Real, Type::Real) => Ok(Type::Bool),
                (Type::Index(_), _) | (_, Type::Index(_)) if index_compatible(&tx, &ty) => Ok(Type::Bool),
                _ => ill(format!("equality at {tx} and {ty}")),
            }
        }
        Expr::Order(_, x, y) => {
            let tx = type_of_at(ctx, networks, x, None)?;
            let ty = type_of_at(ctx, networks, y, Some(&tx))?;
            match (&tx, &ty) {
                (Type::Real, Type::Real) => Ok(Type::Bool),
                (Type::Index(_), _) | (_, Type::Index(_)) if index_compatible(&tx, &ty) => Ok(Type::Bool),
                _ => ill(format!("comparison at {tx} and {ty}")),
            }
        }
        Expr::If(c, x, y) => {
            expect(ctx, networks, c, &Type::Bool)?;
            let tx = type_of_at(ctx, networks, x, None)?;
            let ty = type_of_at(ctx, networks, y, Some(&tx))?;
            if index_compatible(&tx, &ty) {
                Ok(if matches!(tx, Type::Index(u64::MAX)) { ty } else { tx })
            } else {
                ill(format!("branches of type {tx} and {ty}"))
            }
        }
        Expr::Vec(xs) => {
            let Some(first) = xs.first() else {
                return ill("empty vector literal has no element type".into());
            };
            let t0 = type_of_at(ctx, networks, first, None)?;
            for x in &xs[1..] {
                let t = type_of_at(ctx, networks, x, Some(&t0))?;
                if !index_compatible(&t0, &t) {
                    return ill(format!("vector elements of type {t0} and {t}"));
                }
            }
            Ok(Type::vector(t0, xs.len() as u64))
        }
        Expr::At(xs, i) => match type_of(ctx, networks, xs)? {
            Type::Vector(elem, n) => {
                if let Expr::Index(k) = &**i {
                    if *k >= n {
                        return ill(format!("index {k} out of range for size {n}"));
                    }
                } else {
                    expect(ctx, networks, i, &Type::Index(n))?;
                }
                Ok(*elem)
            }
            t => ill(format!("indexing into {t}")),
        },
        Expr::VecAdd(x, y) => {
            let tx = type_of(ctx, networks, x)?;
            let ty = type_of(ctx, networks, y)?;
            match (tx.real_vector_size(), ty.real_vector_size()) {
                (Some(n), Some(m)) if n == m => Ok(real_vec(n)),
                _ => ill(format!("vector addition of {tx} and {ty}")),
            }
        }
        Expr::VecEq(n, x, y) => {
            expect(ctx, networks, x, &real_vec(*n))?;
            expect(ctx, networks, y, &real_vec(*n))?;
            Ok(Type::Bool)
        }
        Expr::Map(g, xs) => {
            let tg = type_of(ctx, networks, g)?;
            let txs = type_of(ctx, networks, xs)?;
            match (tg, txs) {
                (Type::Fun(d, c), Type::Vector(elem, n)) if index_compatible(&d, &elem) => Ok(Type::Vector(c, n)),
                (tg, txs) => ill(format!("map of {tg} over {txs}")),
            }
        }
        Expr::Fold(g, e0, xs) => {
            let tg = type_of(ctx, networks, g)?;
            let te = type_of(ctx, networks, e0)?;
            let txs = type_of(ctx, networks, xs)?;
            match (&tg, &txs) {
                (Type::Fun(d, rest), Type::Vector(elem, _)) => match &**rest {
                    Type::Fun(acc, res) if index_compatible(d, elem) && **acc == te && **res == te => Ok(te),
                    _ => ill(format!("fold of {tg} from {te} over {txs}")),
                },
                _ => ill(format!("fold of {tg} from {te} over {txs}")),
            }
        }
        Expr::ZipWith(n, g, xs, ys) => {
            let tg = type_of(ctx, networks, g)?;
            let tx = type_of(ctx, networks, xs)?;
            let ty = type_of(ctx, networks, ys)?;
            match (&tg, &tx, &ty) {
                (Type::Fun(d1, rest), Type::Vector(e1, n1), Type::Vector(e2, n2)) if n1 == n && n2 == n => {
                    match &**rest {
                        Type::Fun(d2, res) if index_compatible(d1, e1) && index_compatible(d2, e2) => {
                            Ok(Type::Vector(res.clone(), *n))
                        }
                        _ => ill(format!("zipWith of {tg}")),
                    }
                }
                _ => ill(format!("zipWith of {tg} over {tx} and {ty}")),
            }
        }
        Expr::NetworkApp(name, x) => {
            let Some((m, n)) = networks(name) else {
                return ill(format!("unknown network `{name}`"));
            };
            expect(ctx, networks, x, &real_vec(m))?;
            Ok(real_vec(n))
        }
    }
}

/// Like [`type_of`], but a bare index literal takes its size from `hint`.
fn type_of_at(
    ctx: &mut Vec<Type>,
    networks: &dyn Fn(&str) -> Option<(u64, u64)>,
    e: &Expr,
    hint: Option<&Type>,
) -> Result<Type, ScopeError> {
    if let Expr::Index(k) = e {
        return match hint {
            Some(Type::Index(n)) if k < n => Ok(Type::Index(*n)),
            Some(t) => Err(ScopeError::IllTyped(format!("index literal {k} where {t} expected"))),
            // size unknown until the other operand is seen
            None => Ok(Type::Index(u64::MAX)),
        };
    }
    type_of(ctx, networks, e)
}

fn index_compatible(expected: &Type, actual: &Type) -> bool {
    match (expected, actual) {
        (Type::Index(a), Type::Index(b)) => a == b || *a == u64::MAX || *b == u64::MAX,
        (Type::Vector(a, n), Type::Vector(b, m)) => n == m && index_compatible(a, b),
        (Type::Fun(a, b), Type::Fun(c, d)) => index_compatible(a, c) && index_compatible(b, d),
        _ => expected == actual,
    }
}

fn expect(
    ctx: &mut Vec<Type>,
    networks: &dyn Fn(&str) -> Option<(u64, u64)>,
    e: &Expr,
    want: &Type,
) -> Result<(), ScopeError> {
    let got = type_of_at(ctx, networks, e, Some(want))?;
    if index_compatible(want, &got) {
        Ok(())
    } else {
        Err(ScopeError::IllTyped(format!("expected {want}, found {got} in {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn nets(name: &str) -> Option<(u64, u64)> {
        (name == "f").then_some((1, 1))
    }

    #[test]
    fn order_op_negation_and_flip() {
        for op in [OrderOp::Le, OrderOp::Lt, OrderOp::Ge, OrderOp::Gt] {
            assert_eq!(op.neg().neg(), op);
            assert_eq!(op.flip().flip(), op);
            for (x, y) in [(1, 2), (2, 2), (3, 2)] {
                let (x, y) = (int(x), int(y));
                assert_eq!(op.neg().holds(&x, &y), !op.holds(&x, &y));
                assert_eq!(op.flip().holds(&y, &x), op.holds(&x, &y));
            }
        }
    }

    #[test]
    fn scope_audit_rejects_escaping_index() {
        let e = Expr::forall(Binder::new("a", Type::Real), Expr::order(OrderOp::Ge, Expr::Var(1), Expr::Real(int(0))));
        assert_eq!(type_of(&mut vec![], &nets, &e), Err(ScopeError::Unbound { index: 1, depth: 1 }));
    }

    #[test]
    fn reconstructs_types() {
        let body = Expr::order(
            OrderOp::Ge,
            Expr::at(Expr::network("f", Expr::Vec(vec![Expr::Var(0)])), Expr::Index(0)),
            Expr::Real(int(0)),
        );
        let e = Expr::forall(Binder::new("a", Type::Real), body);
        assert_eq!(type_of(&mut vec![], &nets, &e), Ok(Type::Bool));
        let bad = Expr::at(Expr::network("f", Expr::Vec(vec![Expr::Real(int(1))])), Expr::Index(1));
        assert!(type_of(&mut vec![], &nets, &bad).is_err());
    }
}
