//! Environment-based evaluation to weak-head normal form, and read-back.

mod eval;
mod quote;
mod value;

pub use eval::{
    apply, eval, eval_add, eval_and, eval_at, eval_eq, eval_fold, eval_if, eval_map, eval_mul, eval_neq, eval_not,
    eval_or, eval_order, eval_vec_add, eval_vec_eq, eval_zip_with, instantiate,
};
pub use quote::{index_to_level, level_to_index, quote};
pub use value::{Closure, Env, Level, Show, Value};

/// Re-applies the evaluation function matching the head of `v` to its own
/// arguments. A structural value is returned unchanged.
pub fn reevaluate(v: &Value) -> Value {
    let c = |x: &Value| x.clone();
    match v {
        Value::Add(x, y) => eval_add(c(x), c(y)),
        Value::Mul(x, y) => eval_mul(c(x), c(y)),
        Value::And(x, y) => eval_and(c(x), c(y)),
        Value::Or(x, y) => eval_or(c(x), c(y)),
        Value::Not(x) => eval_not(c(x)),
        Value::Equal(x, y) => eval_eq(c(x), c(y)),
        Value::NotEqual(x, y) => eval_neq(c(x), c(y)),
        Value::Order(op, x, y) => eval_order(*op, c(x), c(y)),
        Value::If(b, x, y) => eval_if(c(b), c(x), c(y)),
        Value::At(xs, i) => eval_at(c(xs), c(i)),
        Value::VectorAdd(x, y) => eval_vec_add(c(x), c(y)),
        Value::VectorEqual(n, x, y) => eval_vec_eq(*n, c(x), c(y)),
        Value::Map(f, xs) => eval_map(c(f), c(xs)),
        Value::Fold(f, e, xs) => eval_fold(c(f), c(e), c(xs)),
        other => other.clone(),
    }
}
