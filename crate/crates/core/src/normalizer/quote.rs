use super::eval::instantiate;
use super::value::{Closure, Level, Value};
use crate::frontend::Expr;

/// Reads a value back into a term under `depth` enclosing binders.
pub fn quote(depth: usize, v: &Value) -> Expr {
    let q = |x: &Value| quote(depth, x);
    match v {
        Value::Var(l, spine) => {
            assert!(*l < depth, "level {l} escapes depth {depth}");
            spine.iter().fold(Expr::Var(level_to_index(depth, *l)), |f, a| Expr::app(f, q(a)))
        }
        Value::Lam(b, c) => Expr::lam(b.clone(), quote_body(depth, c)),
        Value::Forall(b, c) => Expr::forall(b.clone(), quote_body(depth, c)),
        Value::Exists(b, c) => Expr::exists(b.clone(), quote_body(depth, c)),
        Value::Real(r) => Expr::Real(r.clone()),
        Value::Bool(b) => Expr::Bool(*b),
        Value::Index(i) => Expr::Index(*i),
        Value::Add(x, y) => Expr::add(q(x), q(y)),
        Value::Mul(x, y) => Expr::mul(q(x), q(y)),
        Value::And(x, y) => Expr::and(q(x), q(y)),
        Value::Or(x, y) => Expr::or(q(x), q(y)),
        Value::Not(x) => Expr::not(q(x)),
        Value::Equal(x, y) => Expr::eq(q(x), q(y)),
        Value::NotEqual(x, y) => Expr::neq(q(x), q(y)),
        Value::Order(op, x, y) => Expr::order(*op, q(x), q(y)),
        Value::If(c, x, y) => Expr::ite(q(c), q(x), q(y)),
        Value::VecLit(xs) => Expr::Vec(xs.iter().map(q).collect()),
        Value::At(xs, i) => Expr::at(q(xs), q(i)),
        Value::VectorEqual(n, x, y) => Expr::vec_eq(*n, q(x), q(y)),
        Value::VectorNotEqual(n, x, y) => Expr::not(Expr::vec_eq(*n, q(x), q(y))),
        Value::VectorAdd(x, y) => Expr::vec_add(q(x), q(y)),
        Value::Map(f, xs) => Expr::map(q(f), q(xs)),
        Value::Fold(f, e, xs) => Expr::fold(q(f), q(e), q(xs)),
        Value::NetworkApp(name, x) => Expr::network(name.clone(), q(x)),
    }
}

fn quote_body(depth: usize, c: &Closure) -> Expr {
    quote(depth + 1, &instantiate(c, Value::var(depth)))
}

pub fn level_to_index(depth: usize, level: Level) -> usize {
    depth - 1 - level
}

pub fn index_to_level(depth: usize, index: usize) -> Level {
    depth - 1 - index
}
