use std::sync::Arc;

use super::value::{Closure, Env, Value};
use crate::frontend::{Expr, OrderOp};

/// Evaluates `expr` to weak-head normal form. The last entry of `env` is
/// de Bruijn index 0.
pub fn eval(env: &Env, expr: &Expr) -> Value {
    match expr {
        Expr::Var(i) => {
            let k = env.len().checked_sub(i + 1).unwrap_or_else(|| panic!("unbound index {i}"));
            env[k].clone()
        }
        Expr::Lam(b, body) => Value::Lam(b.clone(), closure(env, body)),
        Expr::Forall(b, body) => Value::Forall(b.clone(), closure(env, body)),
        Expr::Exists(b, body) => Value::Exists(b.clone(), closure(env, body)),
        Expr::App(f, x) => apply(eval(env, f), eval(env, x)),
        Expr::Real(q) => Value::Real(q.clone()),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Index(i) => Value::Index(*i),
        Expr::Add(x, y) => eval_add(eval(env, x), eval(env, y)),
        Expr::Mul(x, y) => eval_mul(eval(env, x), eval(env, y)),
        Expr::And(x, y) => eval_and(eval(env, x), eval(env, y)),
        Expr::Or(x, y) => eval_or(eval(env, x), eval(env, y)),
        Expr::Not(x) => eval_not(eval(env, x)),
        Expr::Eq(x, y) => eval_eq(eval(env, x), eval(env, y)),
        Expr::Neq(x, y) => eval_neq(eval(env, x), eval(env, y)),
        Expr::Order(op, x, y) => eval_order(*op, eval(env, x), eval(env, y)),
        Expr::If(c, x, y) => eval_if(eval(env, c), eval(env, x), eval(env, y)),
        Expr::Vec(xs) => Value::VecLit(xs.iter().map(|x| eval(env, x)).collect()),
        Expr::At(xs, i) => eval_at(eval(env, xs), eval(env, i)),
        Expr::VecAdd(x, y) => eval_vec_add(eval(env, x), eval(env, y)),
        Expr::VecEq(n, x, y) => eval_vec_eq(*n, eval(env, x), eval(env, y)),
        Expr::Map(f, xs) => eval_map(eval(env, f), eval(env, xs)),
        Expr::Fold(f, e, xs) => eval_fold(eval(env, f), eval(env, e), eval(env, xs)),
        Expr::ZipWith(n, f, xs, ys) => eval_zip_with(*n, eval(env, f), eval(env, xs), eval(env, ys)),
        Expr::NetworkApp(name, x) => Value::network(name.clone(), eval(env, x)),
    }
}

fn closure(env: &Env, body: &Arc<Expr>) -> Closure {
    Closure { env: env.clone(), body: body.clone() }
}

/// Instantiates a closure's bound variable with `arg`.
pub fn instantiate(c: &Closure, arg: Value) -> Value {
    let mut env = c.env.clone();
    env.push(arg);
    eval(&env, &c.body)
}

/// Applies a function value. Variables accumulate a spine and conditionals
/// distribute over the application.
pub fn apply(f: Value, x: Value) -> Value {
    match f {
        Value::Lam(_, c) => instantiate(&c, x),
        Value::Var(l, mut spine) => {
            spine.push(x);
            Value::Var(l, spine)
        }
        Value::If(c, a, b) => Value::ite(*c, apply(*a, x.clone()), apply(*b, x)),
        other => panic!("cannot apply non-function value {other:?}"),
    }
}

pub fn eval_add(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Real(a), Value::Real(b)) => Value::Real(a + b),
        (x, y) => Value::add(x, y),
    }
}

pub fn eval_mul(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Real(a), Value::Real(b)) => Value::Real(a * b),
        (x, y) => Value::mul(x, y),
    }
}

pub fn eval_and(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Bool(false), _) | (_, Value::Bool(false)) => Value::Bool(false),
        (Value::Bool(true), y) => y,
        (x, Value::Bool(true)) => x,
        (x, y) => Value::and(x, y),
    }
}

pub fn eval_or(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Bool(true), _) | (_, Value::Bool(true)) => Value::Bool(true),
        (Value::Bool(false), y) => y,
        (x, Value::Bool(false)) => x,
        (x, y) => Value::or(x, y),
    }
}

pub fn eval_not(x: Value) -> Value {
    match x {
        Value::Bool(b) => Value::Bool(!b),
        x => Value::not(x),
    }
}

pub fn eval_eq(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Real(a), Value::Real(b)) => Value::Bool(a == b),
        (Value::Index(a), Value::Index(b)) => Value::Bool(a == b),
        (x, y) => Value::equal(x, y),
    }
}

pub fn eval_neq(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Real(a), Value::Real(b)) => Value::Bool(a != b),
        (Value::Index(a), Value::Index(b)) => Value::Bool(a != b),
        (x, y) => Value::not_equal(x, y),
    }
}

pub fn eval_order(op: OrderOp, x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::Real(a), Value::Real(b)) => Value::Bool(op.holds(&a, &b)),
        (Value::Index(a), Value::Index(b)) => Value::Bool(match op {
            OrderOp::Le => a <= b,
            OrderOp::Lt => a < b,
            OrderOp::Ge => a >= b,
            OrderOp::Gt => a > b,
        }),
        (x, y) => Value::order(op, x, y),
    }
}

pub fn eval_if(c: Value, x: Value, y: Value) -> Value {
    match c {
        Value::Bool(true) => x,
        Value::Bool(false) => y,
        c => Value::ite(c, x, y),
    }
}

pub fn eval_at(xs: Value, i: Value) -> Value {
    match (xs, i) {
        (Value::VecLit(mut elems), Value::Index(k)) => {
            let k = k as usize;
            assert!(k < elems.len(), "index {k} out of range for vector of length {}", elems.len());
            elems.swap_remove(k)
        }
        (xs, i) => Value::at(xs, i),
    }
}

pub fn eval_vec_add(x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::VecLit(a), Value::VecLit(b)) => {
            Value::VecLit(a.into_iter().zip(b).map(|(p, q)| eval_add(p, q)).collect())
        }
        (x, y) => Value::vector_add(x, y),
    }
}

/// Literal vectors compare elementwise as a right-nested conjunction.
pub fn eval_vec_eq(n: u64, x: Value, y: Value) -> Value {
    match (x, y) {
        (Value::VecLit(a), Value::VecLit(b)) => {
            a.into_iter().zip(b).rev().fold(Value::Bool(true), |acc, (p, q)| eval_and(eval_eq(p, q), acc))
        }
        (x, y) => Value::vector_equal(n, x, y),
    }
}

pub fn eval_map(f: Value, xs: Value) -> Value {
    match xs {
        Value::VecLit(elems) => Value::VecLit(elems.into_iter().map(|x| apply(f.clone(), x)).collect()),
        xs => Value::Map(Box::new(f), Box::new(xs)),
    }
}

/// Right fold: `fold f e [x1, x2] = f x1 (f x2 e)`.
pub fn eval_fold(f: Value, e: Value, xs: Value) -> Value {
    match xs {
        Value::VecLit(elems) => elems.into_iter().rev().fold(e, |acc, x| apply(apply(f.clone(), x), acc)),
        xs => Value::Fold(Box::new(f), Box::new(e), Box::new(xs)),
    }
}

/// Always produces a literal of length `n`; positions of non-literal vectors
/// become `At` projections.
pub fn eval_zip_with(n: u64, f: Value, xs: Value, ys: Value) -> Value {
    Value::VecLit(
        (0..n)
            .map(|i| {
                let x = eval_at(xs.clone(), Value::Index(i));
                let y = eval_at(ys.clone(), Value::Index(i));
                apply(apply(f.clone(), x), y)
            })
            .collect(),
    )
}
