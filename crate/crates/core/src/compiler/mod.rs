//! Compilation of a closed boolean specification into a tree of query sets
//! over network input and output variables.

mod solve;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

pub use solve::{find_constraints, fourier_motzkin, merge, solve_constraints, solve_variable, ConstrainedQuery};

use crate::frontend::{Binder, Expr, OrderOp, Type};
use crate::normalizer::{eval, eval_and, eval_at, eval_neq, eval_not, eval_or, instantiate, Closure, Value};
use crate::query::{
    and_trivial, cartesian_conj, or_trivial, project, to_linear, to_vector_linear, Assertion, Leaf, LinearityError,
    MaybeTrivial, Property, Query, QuerySet, Rel, SolvedQuery, Tree,
};
use crate::state::{Ctx, VarKind};
use crate::unblock::{conjoin_equalities, expand_finite_quantifier, unblock_bool, QuantifierKind};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("alternating quantifiers: `forall` under `exists` cannot be reduced to existential queries")]
    AlternatingQuantifiers,
    #[error("{0}")]
    NonLinearity(#[from] LinearityError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CompileError {
    /// Short class name used in diagnostics.
    pub fn class(&self) -> &'static str {
        match self {
            CompileError::AlternatingQuantifiers => "AlternatingQuantifiers",
            CompileError::NonLinearity(_) => "NonLinearityError",
            CompileError::Internal(_) => "InternalError",
        }
    }
}

type Result<T> = std::result::Result<T, CompileError>;

/// A compiled property together with the context its variables live in.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub property: Property,
    pub ctx: Ctx,
}

/// Compiles a closed boolean expression.
pub fn compile_property(networks: BTreeMap<String, (u64, u64)>, expr: &Expr) -> Result<Compiled> {
    let mut c = Compiler { ctx: Ctx::new(networks) };
    let property = c.property(eval(&Vec::new(), expr))?;
    c.check_no_user_variables(&property)?;
    Ok(Compiled { property, ctx: c.ctx })
}

pub struct Compiler {
    pub ctx: Ctx,
}

impl Compiler {
    pub fn new(ctx: Ctx) -> Compiler {
        Compiler { ctx }
    }

    fn impossible(&mut self, what: &str, v: &Value) -> CompileError {
        self.ctx.stats.impossible_hits += 1;
        let names = |l| self.ctx.name(l);
        CompileError::Internal(format!("{what}: cannot unblock `{}`", v.show(&names)))
    }

    pub fn property(&mut self, v: Value) -> Result<Property> {
        match v {
            Value::And(x, y) => {
                let x = self.property(*x)?;
                Ok(and_trivial(Tree::conj, x, self.property(*y)?))
            }
            Value::Or(x, y) => {
                let x = self.property(*x)?;
                Ok(or_trivial(Tree::disj, x, self.property(*y)?))
            }
            Value::If(c, x, y) => self.property(eliminate_if(*c, *x, *y)),
            Value::Not(x) => {
                let v = self.eliminate_not(*x)?;
                self.property(v)
            }
            Value::Bool(b) => Ok(MaybeTrivial::Trivial(b)),
            Value::Exists(b, c) => match expand_finite_quantifier(QuantifierKind::Exists, &b, &c) {
                Some(v) => self.property(v),
                None => Ok(leaf(false, self.queries(Value::Exists(b, c))?)),
            },
            Value::Forall(b, c) => match expand_finite_quantifier(QuantifierKind::Forall, &b, &c) {
                Some(v) => self.property(v),
                None => Ok(leaf(true, self.queries(Value::Exists(b, negate_body(&c)))?)),
            },
            v => {
                let (out, eqs) = unblock_bool(&mut self.ctx, &v);
                if !eqs.is_empty() {
                    // network applications on closed arguments: an existential
                    // query over the embedding variables alone
                    Ok(leaf(false, self.queries(conjoin_equalities(out, eqs))?))
                } else if out != v {
                    self.property(out)
                } else {
                    Err(self.impossible("property", &v))
                }
            }
        }
    }

    pub fn queries(&mut self, v: Value) -> Result<MaybeTrivial<QuerySet>> {
        match v {
            Value::Bool(b) => Ok(MaybeTrivial::Trivial(b)),
            Value::Forall(b, c) => match expand_finite_quantifier(QuantifierKind::Forall, &b, &c) {
                Some(v) => self.queries(v),
                None => Err(CompileError::AlternatingQuantifiers),
            },
            Value::Order(..) | Value::Equal(..) | Value::VectorEqual(..) => {
                let (out, eqs) = unblock_bool(&mut self.ctx, &v);
                let out = conjoin_equalities(out, eqs);
                if out != v {
                    return self.queries(out);
                }
                match v {
                    Value::Order(op, x, y) => self.compile_ineq(op, &x, &y),
                    Value::Equal(x, y) => self.compile_assertion(&x, Rel::Eq, &y),
                    Value::VectorEqual(n, xs, ys) => self.compile_vec_eq(n, &xs, &ys),
                    _ => unreachable!(),
                }
            }
            Value::If(c, x, y) => self.queries(eliminate_if(*c, *x, *y)),
            Value::Not(x) => {
                let v = self.eliminate_not(*x)?;
                self.queries(v)
            }
            Value::NotEqual(x, y) => self.queries(eliminate_not_equal(*x, *y)),
            Value::VectorNotEqual(n, xs, ys) => self.queries(eliminate_vector_not_equal(n, *xs, *ys)),
            Value::Exists(b, c) => match expand_finite_quantifier(QuantifierKind::Exists, &b, &c) {
                Some(v) => self.queries(v),
                None => self.eliminate_exists(&b, &c),
            },
            Value::And(x, y) => {
                let x = self.queries(*x)?;
                Ok(and_trivial(cartesian_conj, x, self.queries(*y)?))
            }
            Value::Or(x, y) => {
                let x = self.queries(*x)?;
                let y = self.queries(*y)?;
                Ok(or_trivial(
                    |mut a, b| {
                        a.extend(b);
                        a
                    },
                    x,
                    y,
                ))
            }
            v => {
                let (out, eqs) = unblock_bool(&mut self.ctx, &v);
                let out = conjoin_equalities(out, eqs);
                if out == v {
                    return Err(self.impossible("query", &v));
                }
                self.queries(out)
            }
        }
    }

    /// Pushes a negation inwards. Network input equalities produced while
    /// unblocking stay positive.
    pub fn eliminate_not(&mut self, v: Value) -> Result<Value> {
        Ok(match v {
            Value::Not(x) => *x,
            Value::Bool(b) => Value::Bool(!b),
            Value::Order(op, x, y) => Value::Order(op.neg(), x, y),
            Value::Equal(x, y) => Value::NotEqual(x, y),
            Value::NotEqual(x, y) => Value::Equal(x, y),
            Value::VectorEqual(n, x, y) => Value::VectorNotEqual(n, x, y),
            Value::VectorNotEqual(n, x, y) => Value::VectorEqual(n, x, y),
            Value::Forall(b, c) => Value::Exists(b, negate_body(&c)),
            Value::Exists(b, c) => Value::Forall(b, negate_body(&c)),
            Value::Or(x, y) => Value::and(self.eliminate_not(*x)?, self.eliminate_not(*y)?),
            Value::And(x, y) => Value::or(self.eliminate_not(*x)?, self.eliminate_not(*y)?),
            Value::If(c, x, y) => Value::ite(*c, self.eliminate_not(*x)?, self.eliminate_not(*y)?),
            v => {
                let (out, eqs) = unblock_bool(&mut self.ctx, &v);
                if out == v && eqs.is_empty() {
                    return Err(self.impossible("negation", &v));
                }
                conjoin_equalities(self.eliminate_not(out)?, eqs)
            }
        })
    }

    fn eliminate_exists(&mut self, binder: &Binder, body: &Closure) -> Result<MaybeTrivial<QuerySet>> {
        let var = match binder.ty {
            Type::Real => self.ctx.add_real_variable(binder.name.clone()),
            Type::Vector(ref elem, n) if **elem == Type::Real && n >= 1 => {
                self.ctx.add_vector_variable(n, VarKind::UserVector { size: n }, binder.name.clone())
            }
            ref ty => return Err(CompileError::Internal(format!("cannot quantify over {ty}"))),
        };
        let Value::Var(level, _) = var else { unreachable!() };
        let queries = self.queries(instantiate(body, var))?;
        Ok(solve_variable(&mut self.ctx, queries, level))
    }

    fn names(&self) -> impl Fn(usize) -> String + '_ {
        |l| self.ctx.name(l)
    }

    fn compile_ineq(&mut self, op: OrderOp, x: &Value, y: &Value) -> Result<MaybeTrivial<QuerySet>> {
        let rel = match op {
            OrderOp::Le => Rel::Le,
            OrderOp::Lt => Rel::Lt,
            OrderOp::Ge => Rel::Ge,
            OrderOp::Gt => Rel::Gt,
        };
        self.compile_assertion(x, rel, y)
    }

    fn assertion(&self, x: &Value, rel: Rel, y: &Value) -> Result<MaybeTrivial<Query>> {
        let names = self.names();
        let a = Assertion::relation(&to_linear(x, &names)?, rel, &to_linear(y, &names)?);
        Ok(atom(a))
    }

    fn compile_assertion(&mut self, x: &Value, rel: Rel, y: &Value) -> Result<MaybeTrivial<QuerySet>> {
        Ok(single(self.assertion(x, rel, y)?))
    }

    /// Vector-level when both sides are vector-linear, elementwise otherwise.
    fn compile_vec_eq(&mut self, n: u64, xs: &Value, ys: &Value) -> Result<MaybeTrivial<QuerySet>> {
        let size = n as usize;
        if let (Some(l), Some(r)) = (to_vector_linear(size, xs), to_vector_linear(size, ys)) {
            return Ok(single(atom(Assertion::VecEq(l.minus(&r)))));
        }
        let elements = |l| self.ctx.elements(l).map(<[usize]>::to_vec);
        let mut out = MaybeTrivial::Trivial(true);
        for i in (0..size).rev() {
            let (Some(x), Some(y)) = (project(xs, i, &elements), project(ys, i, &elements)) else {
                let names = self.names();
                return Err(CompileError::Internal(format!(
                    "cannot project `{}` == `{}`",
                    xs.show(&names),
                    ys.show(&names)
                )));
            };
            out = and_trivial(Tree::conj, self.assertion(&x, Rel::Eq, &y)?, out);
        }
        Ok(single(out))
    }

    /// Every variable left in a query must be a network variable.
    fn check_no_user_variables(&self, p: &Property) -> Result<()> {
        let Some(tree) = p.as_non_trivial() else { return Ok(()) };
        let mut bad = None;
        tree.for_each_atom(&mut |leaf: &Leaf| {
            for q in &leaf.queries {
                q.query.for_each_atom(&mut |a| {
                    if let Some(v) = a.vars().into_iter().find(|v| self.ctx.is_user(*v)) {
                        bad.get_or_insert(v);
                    }
                })
            }
        });
        match bad {
            Some(v) => {
                Err(CompileError::Internal(format!("user variable `{}` survived compilation", self.ctx.name(v))))
            }
            None => Ok(()),
        }
    }
}

fn leaf(negated: bool, queries: MaybeTrivial<QuerySet>) -> Property {
    match queries {
        MaybeTrivial::Trivial(b) => MaybeTrivial::Trivial(b != negated),
        MaybeTrivial::NonTrivial(queries) => MaybeTrivial::NonTrivial(Tree::Atom(Leaf { negated, queries })),
    }
}

fn atom(a: Assertion) -> MaybeTrivial<Query> {
    match a.decide_constant() {
        Some(b) => MaybeTrivial::Trivial(b),
        None => MaybeTrivial::NonTrivial(Tree::Atom(a)),
    }
}

fn single(q: MaybeTrivial<Query>) -> MaybeTrivial<QuerySet> {
    q.map(|q| vec![SolvedQuery::new(q)])
}

fn negate_body(c: &Closure) -> Closure {
    Closure { env: c.env.clone(), body: Arc::new(Expr::not((*c.body).clone())) }
}

pub fn eliminate_if(c: Value, x: Value, y: Value) -> Value {
    eval_or(eval_and(c.clone(), x), eval_and(eval_not(c), y))
}

pub fn eliminate_not_equal(x: Value, y: Value) -> Value {
    Value::or(Value::order(OrderOp::Lt, x.clone(), y.clone()), Value::order(OrderOp::Gt, x, y))
}

/// `fold (\a b -> a or b) false (zipWith (!=) xs ys)`, unrolled.
pub fn eliminate_vector_not_equal(n: u64, xs: Value, ys: Value) -> Value {
    (0..n).rev().fold(Value::Bool(false), |acc, i| {
        let x = eval_at(xs.clone(), Value::Index(i));
        let y = eval_at(ys.clone(), Value::Index(i));
        eval_or(eval_neq(x, y), acc)
    })
}
