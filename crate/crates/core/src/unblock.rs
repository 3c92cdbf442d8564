//! Removing the subexpressions that block evaluation: conditionals are lifted
//! outwards, network applications become embedding-space variables and
//! vector variables are expanded into their elements.

use crate::frontend::{Binder, Type};
use crate::normalizer::{
    eval_add, eval_at, eval_eq, eval_fold, eval_map, eval_mul, eval_neq, eval_not, eval_order, eval_vec_add,
    eval_vec_eq, instantiate, Closure, Level, Value,
};
use crate::state::{Ctx, EqualityLog};

/// Heads the query compiler consumes directly.
pub fn is_compilable(v: &Value) -> bool {
    matches!(
        v,
        Value::Bool(_)
            | Value::Not(_)
            | Value::And(..)
            | Value::Or(..)
            | Value::If(..)
            | Value::Equal(..)
            | Value::NotEqual(..)
            | Value::VectorEqual(..)
            | Value::VectorNotEqual(..)
            | Value::Order(..)
            | Value::Exists(..)
            | Value::Forall(..)
    )
}

/// Applies `k` at every leaf of the conditional spine of `v`.
pub fn lift_if<S>(state: &mut S, v: Value, k: &mut dyn FnMut(&mut S, Value) -> Value) -> Value {
    match v {
        Value::If(c, x, y) => {
            let x = lift_if(state, *x, k);
            let y = lift_if(state, *y, k);
            Value::ite(*c, x, y)
        }
        v => k(state, v),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantifierKind {
    Forall,
    Exists,
}

/// Expands a quantifier over `Index n` or `Bool` into a finite conjunction or
/// disjunction of instances. Returns `None` for any other domain.
pub fn expand_finite_quantifier(q: QuantifierKind, binder: &Binder, body: &Closure) -> Option<Value> {
    let domain: Vec<Value> = match binder.ty {
        Type::Index(n) => (0..n).map(Value::Index).collect(),
        Type::Bool => vec![Value::Bool(true), Value::Bool(false)],
        _ => return None,
    };
    let unit = Value::Bool(q == QuantifierKind::Forall);
    let mut instances = domain.into_iter().map(|d| instantiate(body, d)).rev();
    let Some(last) = instances.next() else {
        return Some(unit);
    };
    Some(instances.fold(last, |acc, x| match q {
        QuantifierKind::Forall => Value::and(x, acc),
        QuantifierKind::Exists => Value::or(x, acc),
    }))
}

/// Unblocking pass over one value, accumulating the network input equalities
/// it generates.
pub struct Unblocker<'c> {
    pub ctx: &'c mut Ctx,
    log: EqualityLog,
}

impl<'c> Unblocker<'c> {
    pub fn new(ctx: &'c mut Ctx) -> Unblocker<'c> {
        Unblocker { ctx, log: EqualityLog::new() }
    }

    pub fn into_log(self) -> EqualityLog {
        self.log
    }

    pub fn elim_vector_variable(&self, is_vec_op_arg: bool, var: Level) -> Value {
        match self.ctx.elements(var) {
            Some(elements) if !is_vec_op_arg => Value::VecLit(elements.iter().map(|l| Value::var(*l)).collect()),
            _ => Value::var(var),
        }
    }

    /// Replaces an application by its output variable, logging `arg == X`.
    pub fn elim_network_application(&mut self, name: &str, arg: Value) -> Level {
        let (x, y) = self.ctx.add_application(name);
        let m = self.ctx.networks[name].0;
        self.log.log(Value::vector_equal(m, arg, x));
        match y {
            Value::Var(l, _) => l,
            _ => unreachable!("fresh variables are bare"),
        }
    }

    pub fn unblock(&mut self, is_vec_op_arg: bool, v: Value) -> Value {
        match v {
            Value::Var(l, spine) => {
                assert!(spine.is_empty(), "variable {l} of function type reached the unblocker");
                self.elim_vector_variable(is_vec_op_arg, l)
            }
            Value::Bool(_)
            | Value::Real(_)
            | Value::Index(_)
            | Value::And(..)
            | Value::Or(..)
            | Value::Not(_)
            | Value::If(..)
            | Value::Forall(..)
            | Value::Exists(..) => v,
            Value::Lam(..) => panic!("function value reached the unblocker"),
            Value::NetworkApp(name, x) => {
                let x = self.unblock_arg(true, *x);
                lift_if(self, x, &mut |s: &mut Self, x| {
                    let y = s.elim_network_application(&name, x);
                    s.elim_vector_variable(is_vec_op_arg, y)
                })
            }
            Value::VectorAdd(x, y) => self.binary(is_vec_op_arg, *x, *y, &mut |_, x, y| eval_vec_add(x, y)),
            Value::VectorEqual(n, x, y) => self.binary(true, *x, *y, &mut |_, x, y| eval_vec_eq(n, x, y)),
            Value::VectorNotEqual(n, x, y) => self.binary(true, *x, *y, &mut |_, x, y| match (x, y) {
                (x @ Value::VecLit(_), y @ Value::VecLit(_)) => eval_not(eval_vec_eq(n, x, y)),
                (x, y) => Value::vector_not_equal(n, x, y),
            }),
            Value::Add(x, y) => self.binary(false, *x, *y, &mut |_, x, y| eval_add(x, y)),
            Value::Mul(x, y) => self.binary(false, *x, *y, &mut |_, x, y| eval_mul(x, y)),
            Value::Equal(x, y) => self.binary(false, *x, *y, &mut |_, x, y| eval_eq(x, y)),
            Value::NotEqual(x, y) => self.binary(false, *x, *y, &mut |_, x, y| eval_neq(x, y)),
            Value::Order(op, x, y) => self.binary(false, *x, *y, &mut |_, x, y| eval_order(op, x, y)),
            Value::At(xs, i) => {
                let i = self.unblock_arg(false, *i);
                let xs = *xs;
                lift_if(self, i, &mut |s: &mut Self, i| {
                    s.audit(&i);
                    let xs = s.unblock_arg(false, xs.clone());
                    lift_if(s, xs, &mut |s: &mut Self, xs| {
                        s.audit(&xs);
                        eval_at(xs, i.clone())
                    })
                })
            }
            Value::Fold(f, e, xs) => {
                let xs = self.unblock_arg(false, *xs);
                lift_if(self, xs, &mut |s: &mut Self, xs| {
                    s.audit(&xs);
                    eval_fold((*f).clone(), (*e).clone(), xs)
                })
            }
            Value::Map(f, xs) => {
                let xs = self.unblock_arg(false, *xs);
                lift_if(self, xs, &mut |s: &mut Self, xs| {
                    s.audit(&xs);
                    eval_map((*f).clone(), xs)
                })
            }
            Value::VecLit(elems) => {
                let elems: Vec<Value> = elems.into_iter().map(|x| self.unblock_arg(false, x)).collect();
                lift_elements(self, elems, Vec::new())
            }
        }
    }

    /// Unblocks an argument position. Conditionals are kept but their
    /// branches are unblocked too, so every lifted leaf is unblocked.
    fn unblock_arg(&mut self, is_vec_op_arg: bool, v: Value) -> Value {
        match self.unblock(is_vec_op_arg, v) {
            Value::If(c, x, y) => {
                let x = self.unblock_arg(is_vec_op_arg, *x);
                let y = self.unblock_arg(is_vec_op_arg, *y);
                Value::ite(*c, x, y)
            }
            v => v,
        }
    }

    fn binary(
        &mut self,
        is_vec_op_arg: bool,
        x: Value,
        y: Value,
        k: &mut dyn FnMut(&mut Self, Value, Value) -> Value,
    ) -> Value {
        let x = self.unblock_arg(is_vec_op_arg, x);
        lift_if(self, x, &mut |s: &mut Self, x| {
            let y = s.unblock_arg(is_vec_op_arg, y.clone());
            lift_if(s, y, &mut |s: &mut Self, y| k(s, x.clone(), y))
        })
    }

    /// Counts a vector or index argument that is still not a literal after
    /// unblocking.
    fn audit(&mut self, v: &Value) {
        if !matches!(v, Value::VecLit(_) | Value::Index(_)) {
            self.ctx.stats.blocking_violations += 1;
        }
    }
}

fn lift_elements(s: &mut Unblocker<'_>, mut rest: Vec<Value>, done: Vec<Value>) -> Value {
    if rest.is_empty() {
        return Value::VecLit(done);
    }
    let head = rest.remove(0);
    lift_if(s, head, &mut |s: &mut Unblocker<'_>, x| {
        let mut done = done.clone();
        done.push(x);
        lift_elements(s, rest.clone(), done)
    })
}

/// Unblocks a boolean, returning the unblocked value and the network input
/// equalities it generated, outermost application last.
pub fn unblock_bool(ctx: &mut Ctx, v: &Value) -> (Value, Vec<Value>) {
    let mut u = Unblocker::new(ctx);
    let out = u.unblock(false, v.clone());
    (out, u.into_log().into_entries())
}

/// Conjoins `eqs` in front of `v`, first equality outermost.
pub fn conjoin_equalities(v: Value, eqs: Vec<Value>) -> Value {
    eqs.into_iter().rev().fold(v, |acc, eq| Value::and(eq, acc))
}

/// Unblocks a boolean and conjoins the generated input equalities. Returns
/// `None` when nothing changed.
pub fn try_unblock_bool(ctx: &mut Ctx, v: &Value) -> Option<Value> {
    let (out, eqs) = unblock_bool(ctx, v);
    let out = conjoin_equalities(out, eqs);
    (out != *v).then_some(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::frontend::{Expr, OrderOp};
    use crate::normalizer::eval;
    use crate::rational::{int, ratio};
    use crate::state::VarKind;

    fn ctx() -> Ctx {
        Ctx::new(BTreeMap::from([("f".to_string(), (1, 1)), ("g".to_string(), (2, 1))]))
    }

    fn r(n: i64) -> Value {
        Value::Real(int(n))
    }

    #[test]
    fn compilable_heads() {
        assert!(is_compilable(&Value::and(Value::Bool(true), Value::var(0))));
        assert!(!is_compilable(&Value::var(0)));
        let fold = Value::Fold(Box::new(Value::var(1)), Box::new(Value::Bool(true)), Box::new(Value::var(0)));
        assert!(!is_compilable(&fold));
    }

    #[test]
    fn lift_if_maps_every_leaf() {
        let c = |l| Value::var(l);
        let v = Value::ite(c(0), Value::ite(c(1), r(1), r(2)), Value::ite(c(2), r(3), r(4)));
        let mut seen = Vec::new();
        let out = lift_if(&mut seen, v, &mut |seen: &mut Vec<Value>, x| {
            seen.push(x.clone());
            Value::equal(r(0), x)
        });
        assert_eq!(seen, vec![r(1), r(2), r(3), r(4)]);
        let expected = Value::ite(
            c(0),
            Value::ite(c(1), Value::equal(r(0), r(1)), Value::equal(r(0), r(2))),
            Value::ite(c(2), Value::equal(r(0), r(3)), Value::equal(r(0), r(4))),
        );
        assert_eq!(out, expected);
        let mut unit = ();
        assert_eq!(lift_if(&mut unit, r(7), &mut |_, x| Value::not(x)), Value::not(r(7)));
    }

    #[test]
    fn zero_equals_conditional_lifts() {
        let mut ctx = ctx();
        ctx.add_real_variable("c");
        let v = Value::equal(r(0), Value::ite(Value::var(0), r(1), r(2)));
        let out = try_unblock_bool(&mut ctx, &v).unwrap();
        assert_eq!(out, Value::ite(Value::var(0), Value::Bool(false), Value::Bool(false)));
    }

    #[test]
    fn vector_variables_expand_outside_vector_operations() {
        let mut ctx = ctx();
        ctx.add_vector_variable(2, VarKind::UserVector { size: 2 }, "a");
        let u = Unblocker::new(&mut ctx);
        assert_eq!(u.elim_vector_variable(false, 0), Value::VecLit(vec![Value::var(1), Value::var(2)]));
        assert_eq!(u.elim_vector_variable(true, 0), Value::var(0));
        assert_eq!(u.elim_vector_variable(false, 1), Value::var(1));
    }

    #[test]
    fn network_application_is_replaced() {
        let mut ctx = ctx();
        let a = ctx.add_real_variable("a");
        // 0 <= f [a + 2] ! 0
        let arg = Value::VecLit(vec![Value::add(a.clone(), r(2))]);
        let v = Value::order(OrderOp::Le, r(0), Value::at(Value::network("f", arg.clone()), Value::Index(0)));
        let out = try_unblock_bool(&mut ctx, &v).unwrap();
        // X is level 1, its element 2, Y is level 3, its element 4
        let expected =
            Value::and(Value::vector_equal(1, arg, Value::var(1)), Value::order(OrderOp::Le, r(0), Value::var(4)));
        assert_eq!(out, expected);
        assert_eq!(ctx.stats.blocking_violations, 0);
        ctx.check_invariants().unwrap();
    }

    #[test]
    fn repeated_applications_get_fresh_variables() {
        let mut ctx = ctx();
        let a = ctx.add_real_variable("a");
        let app = || Value::at(Value::network("f", Value::VecLit(vec![a.clone()])), Value::Index(0));
        let v = Value::order(OrderOp::Le, app(), app());
        let out = try_unblock_bool(&mut ctx, &v).unwrap();
        assert_eq!(ctx.applications.len(), 2);
        let Value::And(_, rest) = out else { panic!() };
        let Value::And(_, ineq) = *rest else { panic!() };
        assert_eq!(*ineq, Value::order(OrderOp::Le, Value::var(4), Value::var(8)));
    }

    #[test]
    fn nested_applications_resolve_innermost_first() {
        // g [0.5 + f [a] ! 0, g [0, a] ! 0] ! 0 >= 0
        let mut ctx = ctx();
        let a = ctx.add_real_variable("a");
        let at0 = |v| Value::at(v, Value::Index(0));
        let inner_f = at0(Value::network("f", Value::VecLit(vec![a.clone()])));
        let inner_g = at0(Value::network("g", Value::VecLit(vec![r(0), a.clone()])));
        let outer = Value::network("g", Value::VecLit(vec![Value::add(Value::Real(ratio(1, 2)), inner_f), inner_g]));
        let v = Value::order(OrderOp::Ge, at0(outer), r(0));
        let (out, eqs) = unblock_bool(&mut ctx, &v);
        let names: Vec<_> = ctx.applications.iter().map(|a| a.network.as_str()).collect();
        assert_eq!(names, ["f", "g", "g"]);
        assert_eq!(eqs.len(), 3);
        let Value::VectorEqual(_, last_arg, _) = &eqs[2] else { panic!() };
        // the outer argument mentions the inner outputs, not applications
        let rendered = format!("{}", last_arg.show(&|l| ctx.name(l)));
        assert_eq!(rendered, "[0.5 + f#0.out[0], g#1.out[0]]");
        let y = ctx.applications[2].output;
        assert_eq!(out, Value::order(OrderOp::Ge, Value::var(y + 1), r(0)));
    }

    #[test]
    fn fold_over_vector_variable_unrolls() {
        let mut ctx = ctx();
        let xs = ctx.add_vector_variable(3, VarKind::UserVector { size: 3 }, "xs");
        let env = vec![xs];
        // fold (\a r -> a >= 0 and r) true xs
        let body = Expr::fold(
            Expr::lam(
                Binder::new("a", Type::Real),
                Expr::lam(
                    Binder::new("r", Type::Bool),
                    Expr::and(Expr::order(OrderOp::Ge, Expr::Var(1), Expr::Real(int(0))), Expr::Var(0)),
                ),
            ),
            Expr::Bool(true),
            Expr::Var(0),
        );
        let v = eval(&env, &body);
        assert!(!is_compilable(&v));
        let out = try_unblock_bool(&mut ctx, &v).unwrap();
        let ge = |l| Value::order(OrderOp::Ge, Value::var(l), r(0));
        assert_eq!(out, Value::and(ge(1), Value::and(ge(2), ge(3))));
        assert_eq!(ctx.stats.blocking_violations, 0);
    }

    #[test]
    fn vector_addition_keeps_vector_variables_in_network_arguments() {
        let mut ctx = ctx();
        let a = ctx.add_vector_variable(1, VarKind::UserVector { size: 1 }, "a");
        let c = Value::VecLit(vec![r(3)]);
        let v = Value::order(
            OrderOp::Ge,
            Value::at(Value::network("f", Value::vector_add(a.clone(), c.clone())), Value::Index(0)),
            r(0),
        );
        let (_, eqs) = unblock_bool(&mut ctx, &v);
        assert_eq!(eqs, vec![Value::vector_equal(1, Value::vector_add(a, c), Value::var(2))]);
    }

    #[test]
    fn compilable_values_are_unchanged() {
        let mut ctx = ctx();
        let v = Value::and(Value::var(0), Value::var(0));
        assert_eq!(try_unblock_bool(&mut ctx, &v), None);
        ctx.add_real_variable("a");
        assert_eq!(try_unblock_bool(&mut ctx, &Value::order(OrderOp::Le, Value::var(0), r(2))), None);
    }

    #[test]
    fn conditional_network_arguments_unblock_both_branches() {
        let mut ctx = ctx();
        let a = ctx.add_real_variable("a");
        let fa = Value::at(Value::network("f", Value::VecLit(vec![a.clone()])), Value::Index(0));
        let arg =
            Value::ite(Value::order(OrderOp::Ge, a.clone(), r(0)), Value::VecLit(vec![fa]), Value::VecLit(vec![r(1)]));
        let v = Value::order(OrderOp::Ge, Value::at(Value::network("f", arg), Value::Index(0)), r(0));
        let (_, eqs) = unblock_bool(&mut ctx, &v);
        // the inner application, then the outer one once per branch
        assert_eq!(eqs.len(), 3);
        assert_eq!(ctx.stats.blocking_violations, 0);
    }

    #[test]
    fn finite_quantifiers_expand() {
        let env = vec![];
        let idx = |n| Binder::new("i", Type::Index(n));
        let body = Expr::eq(Expr::Var(0), Expr::Index(1));
        let clo = Closure { env, body: std::sync::Arc::new(body) };
        assert_eq!(
            expand_finite_quantifier(QuantifierKind::Forall, &idx(2), &clo),
            Some(Value::and(Value::Bool(false), Value::Bool(true)))
        );
        assert_eq!(expand_finite_quantifier(QuantifierKind::Forall, &idx(0), &clo), Some(Value::Bool(true)));
        assert_eq!(expand_finite_quantifier(QuantifierKind::Exists, &idx(0), &clo), Some(Value::Bool(false)));
        let b = Closure { env: vec![], body: std::sync::Arc::new(Expr::Var(0)) };
        assert_eq!(
            expand_finite_quantifier(QuantifierKind::Exists, &Binder::new("b", Type::Bool), &b),
            Some(Value::or(Value::Bool(true), Value::Bool(false)))
        );
        assert_eq!(expand_finite_quantifier(QuantifierKind::Exists, &Binder::new("x", Type::Real), &b), None);
    }
}
