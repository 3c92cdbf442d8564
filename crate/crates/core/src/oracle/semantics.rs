//! Direct semantics of specifications over concrete affine networks.
//!
//! Terms are evaluated to linear forms and quantifier-free formulas over
//! fresh real variables; every quantifier is eliminated on the spot by
//! disjunctive splitting and exact projection. Networks are inlined as their
//! affine maps. The evaluator shares nothing with the compiler beyond the
//! syntax tree and the linear-expression type.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::lra::{project, satisfy, Limits};
use super::networks::AffineNetwork;
use super::OracleError;
use crate::frontend::{Expr, OrderOp, Type};
use crate::query::{Assertion, Rel, ScalarLinear, Var};
use crate::rational::{int, Rational};

/// Quantifier-free formulas over linear atoms.
#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Const(bool),
    Atom(Assertion),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    fn atom(a: Assertion) -> Formula {
        match a.decide_constant() {
            Some(b) => Formula::Const(b),
            None => Formula::Atom(a),
        }
    }

    fn and(x: Formula, y: Formula) -> Formula {
        match (x, y) {
            (Formula::Const(false), _) | (_, Formula::Const(false)) => Formula::Const(false),
            (Formula::Const(true), f) | (f, Formula::Const(true)) => f,
            (x, y) => Formula::And(Box::new(x), Box::new(y)),
        }
    }

    fn or(x: Formula, y: Formula) -> Formula {
        match (x, y) {
            (Formula::Const(true), _) | (_, Formula::Const(true)) => Formula::Const(true),
            (Formula::Const(false), f) | (f, Formula::Const(false)) => f,
            (x, y) => Formula::Or(Box::new(x), Box::new(y)),
        }
    }

    fn not(x: Formula) -> Formula {
        match x {
            Formula::Const(b) => Formula::Const(!b),
            Formula::Not(f) => *f,
            f => Formula::Not(Box::new(f)),
        }
    }

    /// Truth value of a formula whose atoms are all variable-free.
    pub fn truth(&self) -> Option<bool> {
        Some(match self {
            Formula::Const(b) => *b,
            Formula::Atom(a) => a.decide_constant()?,
            Formula::Not(f) => !f.truth()?,
            Formula::And(x, y) => x.truth()? && y.truth()?,
            Formula::Or(x, y) => x.truth()? || y.truth()?,
        })
    }
}

type Env = Vec<SVal>;

#[derive(Clone, Debug)]
enum SVal {
    Real(ScalarLinear),
    Bool(Formula),
    Index(u64),
    Vec(Vec<SVal>),
    Fun(Env, Arc<Expr>),
    /// A value selected by a symbolic condition.
    Cases(Formula, Box<SVal>, Box<SVal>),
}

fn cases(c: Formula, x: SVal, y: SVal) -> SVal {
    match (c, x, y) {
        (Formula::Const(true), x, _) => x,
        (Formula::Const(false), _, y) => y,
        (c, SVal::Bool(a), SVal::Bool(b)) => {
            SVal::Bool(Formula::or(Formula::and(c.clone(), a), Formula::and(Formula::not(c), b)))
        }
        (c, SVal::Vec(xs), SVal::Vec(ys)) if xs.len() == ys.len() => {
            SVal::Vec(xs.into_iter().zip(ys).map(|(x, y)| cases(c.clone(), x, y)).collect())
        }
        (c, x, y) => SVal::Cases(c, Box::new(x), Box::new(y)),
    }
}

type R<T> = Result<T, OracleError>;

fn lift1(v: SVal, f: &mut dyn FnMut(SVal) -> R<SVal>) -> R<SVal> {
    match v {
        SVal::Cases(c, x, y) => {
            let x = lift1(*x, f)?;
            let y = lift1(*y, f)?;
            Ok(cases(c, x, y))
        }
        v => f(v),
    }
}

fn lift2(x: SVal, y: SVal, f: &mut dyn FnMut(SVal, SVal) -> R<SVal>) -> R<SVal> {
    match (x, y) {
        (SVal::Cases(c, a, b), y) => {
            let a = lift2(*a, y.clone(), f)?;
            let b = lift2(*b, y, f)?;
            Ok(cases(c, a, b))
        }
        (x, SVal::Cases(c, a, b)) => {
            let a = lift2(x.clone(), *a, f)?;
            let b = lift2(x, *b, f)?;
            Ok(cases(c, a, b))
        }
        (x, y) => f(x, y),
    }
}

fn shape(what: &str, v: &SVal) -> OracleError {
    OracleError::Unsupported(format!("expected {what}, found {v:?}"))
}

fn formula(v: SVal) -> R<Formula> {
    match v {
        SVal::Bool(f) => Ok(f),
        SVal::Cases(c, x, y) => {
            let (x, y) = (formula(*x)?, formula(*y)?);
            Ok(Formula::or(Formula::and(c.clone(), x), Formula::and(Formula::not(c), y)))
        }
        v => Err(shape("a boolean", &v)),
    }
}

fn rel(op: OrderOp) -> Rel {
    match op {
        OrderOp::Le => Rel::Le,
        OrderOp::Lt => Rel::Lt,
        OrderOp::Ge => Rel::Ge,
        OrderOp::Gt => Rel::Gt,
    }
}

fn add(x: SVal, y: SVal) -> R<SVal> {
    lift2(x, y, &mut |x, y| match (x, y) {
        (SVal::Real(a), SVal::Real(b)) => Ok(SVal::Real(a.plus(&b))),
        (x, _) => Err(shape("a real", &x)),
    })
}

fn mul(x: SVal, y: SVal) -> R<SVal> {
    lift2(x, y, &mut |x, y| match (x, y) {
        (SVal::Real(a), SVal::Real(b)) if a.is_constant() => Ok(SVal::Real(b.scale(&a.constant))),
        (SVal::Real(a), SVal::Real(b)) if b.is_constant() => Ok(SVal::Real(a.scale(&b.constant))),
        (SVal::Real(_), SVal::Real(_)) => Err(OracleError::NonLinearSemantics("product of two variables".into())),
        (x, _) => Err(shape("a real", &x)),
    })
}

fn equal(x: SVal, y: SVal) -> R<SVal> {
    lift2(x, y, &mut |x, y| match (x, y) {
        (SVal::Real(a), SVal::Real(b)) => Ok(SVal::Bool(Formula::atom(Assertion::relation(&a, Rel::Eq, &b)))),
        (SVal::Index(i), SVal::Index(j)) => Ok(SVal::Bool(Formula::Const(i == j))),
        (x, _) => Err(shape("a real or an index", &x)),
    })
}

fn order(op: OrderOp, x: SVal, y: SVal) -> R<SVal> {
    lift2(x, y, &mut |x, y| match (x, y) {
        (SVal::Real(a), SVal::Real(b)) => Ok(SVal::Bool(Formula::atom(Assertion::relation(&a, rel(op), &b)))),
        (SVal::Index(i), SVal::Index(j)) => Ok(SVal::Bool(Formula::Const(op.holds(&int(i as i64), &int(j as i64))))),
        (x, _) => Err(shape("a real or an index", &x)),
    })
}

fn elements(v: SVal) -> R<Vec<SVal>> {
    match v {
        SVal::Vec(xs) => Ok(xs),
        v => Err(shape("a vector", &v)),
    }
}

/// How quantified reals range.
#[derive(Clone, Debug)]
enum Domain {
    Symbolic,
    Grid(Vec<Rational>),
}

struct Evaluator<'n> {
    nets: &'n BTreeMap<String, AffineNetwork>,
    domain: Domain,
    limits: Limits,
    next: Var,
}

impl Evaluator<'_> {
    fn eval(&mut self, env: &Env, e: &Expr) -> R<SVal> {
        Ok(match e {
            Expr::Var(i) => env[env.len() - 1 - i].clone(),
            Expr::Lam(_, body) => SVal::Fun(env.clone(), body.clone()),
            Expr::App(f, x) => {
                let f = self.eval(env, f)?;
                let x = self.eval(env, x)?;
                self.apply(f, x)?
            }
            Expr::Real(q) => SVal::Real(ScalarLinear::constant(q.clone())),
            Expr::Bool(b) => SVal::Bool(Formula::Const(*b)),
            Expr::Index(i) => SVal::Index(*i),
            Expr::Add(x, y) => add(self.eval(env, x)?, self.eval(env, y)?)?,
            Expr::Mul(x, y) => mul(self.eval(env, x)?, self.eval(env, y)?)?,
            Expr::And(x, y) => SVal::Bool(Formula::and(formula(self.eval(env, x)?)?, formula(self.eval(env, y)?)?)),
            Expr::Or(x, y) => SVal::Bool(Formula::or(formula(self.eval(env, x)?)?, formula(self.eval(env, y)?)?)),
            Expr::Not(x) => SVal::Bool(Formula::not(formula(self.eval(env, x)?)?)),
            Expr::Eq(x, y) => equal(self.eval(env, x)?, self.eval(env, y)?)?,
            Expr::Neq(x, y) => SVal::Bool(Formula::not(formula(equal(self.eval(env, x)?, self.eval(env, y)?)?)?)),
            Expr::Order(op, x, y) => order(*op, self.eval(env, x)?, self.eval(env, y)?)?,
            Expr::If(c, x, y) => {
                let c = formula(self.eval(env, c)?)?;
                cases(c, self.eval(env, x)?, self.eval(env, y)?)
            }
            Expr::Forall(b, body) => SVal::Bool(self.quantify(false, &b.ty, env, body)?),
            Expr::Exists(b, body) => SVal::Bool(self.quantify(true, &b.ty, env, body)?),
            Expr::Vec(xs) => SVal::Vec(xs.iter().map(|x| self.eval(env, x)).collect::<R<_>>()?),
            Expr::At(xs, i) => {
                let xs = self.eval(env, xs)?;
                let i = self.eval(env, i)?;
                lift2(xs, i, &mut |xs, i| match (xs, i) {
                    (SVal::Vec(mut xs), SVal::Index(k)) if (k as usize) < xs.len() => Ok(xs.swap_remove(k as usize)),
                    (xs, _) => Err(shape("a vector and an index in range", &xs)),
                })?
            }
            Expr::VecAdd(x, y) => {
                let (xs, ys) = (elements(self.eval(env, x)?)?, elements(self.eval(env, y)?)?);
                SVal::Vec(xs.into_iter().zip(ys).map(|(x, y)| add(x, y)).collect::<R<_>>()?)
            }
            Expr::VecEq(_, x, y) => {
                let (xs, ys) = (elements(self.eval(env, x)?)?, elements(self.eval(env, y)?)?);
                let mut acc = Formula::Const(true);
                for (x, y) in xs.into_iter().zip(ys) {
                    acc = Formula::and(acc, formula(equal(x, y)?)?);
                }
                SVal::Bool(acc)
            }
            Expr::Map(f, xs) => {
                let f = self.eval(env, f)?;
                let xs = elements(self.eval(env, xs)?)?;
                SVal::Vec(xs.into_iter().map(|x| self.apply(f.clone(), x)).collect::<R<_>>()?)
            }
            Expr::Fold(f, e, xs) => {
                let f = self.eval(env, f)?;
                let mut acc = self.eval(env, e)?;
                for x in elements(self.eval(env, xs)?)?.into_iter().rev() {
                    let g = self.apply(f.clone(), x)?;
                    acc = self.apply(g, acc)?;
                }
                acc
            }
            Expr::ZipWith(_, f, xs, ys) => {
                let f = self.eval(env, f)?;
                let (xs, ys) = (elements(self.eval(env, xs)?)?, elements(self.eval(env, ys)?)?);
                let mut out = Vec::with_capacity(xs.len());
                for (x, y) in xs.into_iter().zip(ys) {
                    let g = self.apply(f.clone(), x)?;
                    out.push(self.apply(g, y)?);
                }
                SVal::Vec(out)
            }
            Expr::NetworkApp(name, x) => {
                let net = self.nets.get(name).ok_or_else(|| OracleError::MissingNetwork(name.clone()))?;
                let xs = elements(self.eval(env, x)?)?;
                net.check_shape(xs.len(), net.outputs())?;
                let mut out = Vec::with_capacity(net.outputs());
                for (row, b) in net.weights.iter().zip(&net.bias) {
                    let mut acc = SVal::Real(ScalarLinear::constant(b.clone()));
                    for (w, x) in row.iter().zip(&xs) {
                        let term = mul(SVal::Real(ScalarLinear::constant(w.clone())), x.clone())?;
                        acc = add(acc, term)?;
                    }
                    out.push(acc);
                }
                SVal::Vec(out)
            }
        })
    }

    fn apply(&mut self, f: SVal, x: SVal) -> R<SVal> {
        lift1(f, &mut |f| match f {
            SVal::Fun(mut env, body) => {
                env.push(x.clone());
                self.eval(&env, &body)
            }
            f => Err(shape("a function", &f)),
        })
    }

    /// Every value of type `ty` as a term over fresh variables.
    fn instances(&mut self, ty: &Type) -> R<Vec<(SVal, Vec<Var>)>> {
        Ok(match ty {
            Type::Real => match &self.domain {
                Domain::Symbolic => {
                    let v = self.next;
                    self.next += 1;
                    vec![(SVal::Real(ScalarLinear::scalar_var(v)), vec![v])]
                }
                Domain::Grid(points) => {
                    points.iter().map(|q| (SVal::Real(ScalarLinear::constant(q.clone())), Vec::new())).collect()
                }
            },
            Type::Bool => vec![(SVal::Bool(Formula::Const(false)), vec![]), (SVal::Bool(Formula::Const(true)), vec![])],
            Type::Index(n) => (0..*n).map(|i| (SVal::Index(i), Vec::new())).collect(),
            Type::Vector(elem, n) => {
                let mut acc: Vec<(Vec<SVal>, Vec<Var>)> = vec![(Vec::new(), Vec::new())];
                for _ in 0..*n {
                    let options = self.instances(elem)?;
                    let mut next = Vec::with_capacity(acc.len() * options.len());
                    for (xs, vs) in &acc {
                        for (x, ws) in &options {
                            let mut xs = xs.clone();
                            xs.push(x.clone());
                            let mut vs = vs.clone();
                            vs.extend(ws);
                            next.push((xs, vs));
                        }
                    }
                    acc = next;
                }
                acc.into_iter().map(|(xs, vs)| (SVal::Vec(xs), vs)).collect()
            }
            other => return Err(OracleError::Unsupported(format!("quantifier over {other}"))),
        })
    }

    fn quantify(&mut self, exists: bool, ty: &Type, env: &Env, body: &Arc<Expr>) -> R<Formula> {
        let mut acc = Formula::Const(!exists);
        for (value, vars) in self.instances(ty)? {
            let mut env = env.clone();
            env.push(value);
            let f = formula(self.eval(&env, body)?)?;
            let f =
                if exists { self.eliminate(&vars, f)? } else { Formula::not(self.eliminate(&vars, Formula::not(f))?) };
            acc = if exists { Formula::or(acc, f) } else { Formula::and(acc, f) };
            if acc == Formula::Const(exists) {
                break;
            }
        }
        Ok(acc)
    }

    /// Quantifier-free equivalent of `∃ vars. f`.
    fn eliminate(&self, vars: &[Var], f: Formula) -> R<Formula> {
        if vars.is_empty() {
            return Ok(f);
        }
        let mut out = Formula::Const(false);
        for mut conj in dnf(&f, true, self.limits.max_constraints)? {
            let mut feasible = true;
            for v in vars {
                match project(*v, &conj)? {
                    Some(c) => conj = c,
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible && satisfy(&conj, self.limits)?.is_some() {
                let clause = conj.into_iter().fold(Formula::Const(true), |acc, a| Formula::and(acc, Formula::atom(a)));
                out = Formula::or(out, clause);
            }
        }
        Ok(out)
    }
}

/// Disjunctive normal form of `f` (or of its negation when `positive` is
/// false), with negated atoms rewritten to positive ones.
fn dnf(f: &Formula, positive: bool, limit: usize) -> R<Vec<Vec<Assertion>>> {
    let product = |xs: Vec<Vec<Assertion>>, ys: Vec<Vec<Assertion>>| -> R<Vec<Vec<Assertion>>> {
        if xs.len() * ys.len() > limit {
            return Err(OracleError::TooLarge { what: "disjuncts", size: xs.len() * ys.len(), limit });
        }
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for x in &xs {
            for y in &ys {
                let mut c = x.clone();
                c.extend(y.iter().cloned());
                out.push(c);
            }
        }
        Ok(out)
    };
    Ok(match (f, positive) {
        (Formula::Const(b), p) => {
            if *b == p {
                vec![vec![]]
            } else {
                vec![]
            }
        }
        (Formula::Atom(a), true) => vec![vec![a.clone()]],
        (Formula::Atom(Assertion::Eq(l)), false) => vec![
            vec![Assertion::Ineq { strict: true, lin: l.clone() }],
            vec![Assertion::Ineq { strict: true, lin: l.scale(&int(-1)) }],
        ],
        (Formula::Atom(Assertion::Ineq { strict, lin }), false) => {
            vec![vec![Assertion::Ineq { strict: !strict, lin: lin.scale(&int(-1)) }]]
        }
        (Formula::Atom(a @ Assertion::VecEq(_)), _) => return Err(OracleError::Unsupported(format!("{a:?}"))),
        (Formula::Not(x), p) => dnf(x, !p, limit)?,
        (Formula::And(x, y), true) | (Formula::Or(x, y), false) => {
            product(dnf(x, positive, limit)?, dnf(y, positive, limit)?)?
        }
        (Formula::Or(x, y), true) | (Formula::And(x, y), false) => {
            let mut out = dnf(x, positive, limit)?;
            out.extend(dnf(y, positive, limit)?);
            out
        }
    })
}

fn truth_of(f: Formula) -> R<bool> {
    f.truth().ok_or_else(|| OracleError::Unsupported("free variables in a closed property".into()))
}

/// Truth value of a closed property, with quantifiers eliminated exactly.
pub fn eval_property(expr: &Expr, nets: &BTreeMap<String, AffineNetwork>, limits: Limits) -> R<bool> {
    let mut ev = Evaluator { nets, domain: Domain::Symbolic, limits, next: 0 };
    let v = ev.eval(&Vec::new(), expr)?;
    truth_of(formula(v)?)
}

/// Truth value of a closed property when every real quantifier ranges over
/// `grid` only.
pub fn eval_property_grid(expr: &Expr, nets: &BTreeMap<String, AffineNetwork>, grid: &[Rational]) -> R<bool> {
    let mut ev = Evaluator { nets, domain: Domain::Grid(grid.to_vec()), limits: Limits::default(), next: 0 };
    let v = ev.eval(&Vec::new(), expr)?;
    truth_of(formula(v)?)
}

/// A concrete value for a bound variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Concrete {
    Real(Rational),
    Vector(Vec<Rational>),
}

impl Concrete {
    fn to_sval(&self) -> SVal {
        let real = |q: &Rational| SVal::Real(ScalarLinear::constant(q.clone()));
        match self {
            Concrete::Real(q) => real(q),
            Concrete::Vector(xs) => SVal::Vec(xs.iter().map(real).collect()),
        }
    }
}

/// Truth value of `body` with its free variables bound to `bindings`,
/// outermost first.
pub fn eval_open(
    body: &Expr,
    bindings: &[Concrete],
    nets: &BTreeMap<String, AffineNetwork>,
    limits: Limits,
) -> R<bool> {
    let mut ev = Evaluator { nets, domain: Domain::Symbolic, limits, next: 0 };
    let env: Env = bindings.iter().map(Concrete::to_sval).collect();
    let v = ev.eval(&env, body)?;
    truth_of(formula(v)?)
}

/// `{-2, -1, 0, 1, 2}`.
pub fn default_grid() -> Vec<Rational> {
    (-2..=2).map(int).collect()
}

/// Whether `expr` is free of real quantifiers, in which case grid and
/// symbolic evaluation must agree exactly.
pub fn has_real_quantifier(expr: &Expr) -> bool {
    fn real_in(ty: &Type) -> bool {
        match ty {
            Type::Real => true,
            Type::Vector(e, n) => *n > 0 && real_in(e),
            _ => false,
        }
    }
    match expr {
        Expr::Forall(b, body) | Expr::Exists(b, body) => real_in(&b.ty) || has_real_quantifier(body),
        e => e.children().into_iter().any(has_real_quantifier),
    }
}
