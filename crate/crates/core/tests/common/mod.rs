//! Shared test support: random specifications, networks, terms and linear
//! systems, a big-step reference interpreter and golden rendering.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vspecc_core::backend::{property_files, Format, Options};
use vspecc_core::driver::compile_program;
use vspecc_core::frontend::{load, Binder, Expr, OrderOp, Type};
use vspecc_core::normalizer::{eval, Value};
use vspecc_core::oracle::AffineNetwork;
use vspecc_core::query::{Assertion, ScalarLinear, Var};
use vspecc_core::rational::{format_rational, int, ratio, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn corpus(name: &str) -> String {
    let path = workspace_root().join("corpus").join(format!("{name}.vspec"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Small rationals: integers in `-3..=3` and halves.
pub fn small_rational(rng: &mut impl Rng) -> Rational {
    match rng.gen_range(0..3) {
        0 => ratio(rng.gen_range(-6..=6), 2),
        _ => int(rng.gen_range(-3..=3)),
    }
}

pub fn literal(q: &Rational) -> String {
    let text = format_rational(q);
    if text.starts_with('-') {
        format!("({text})")
    } else {
        text
    }
}

pub fn random_network(rng: &mut impl Rng, name: &str, inputs: usize, outputs: usize) -> AffineNetwork {
    let weights = (0..outputs).map(|_| (0..inputs).map(|_| small_rational(rng)).collect()).collect();
    let bias = (0..outputs).map(|_| small_rational(rng)).collect();
    AffineNetwork::new(name, weights, bias).unwrap()
}

/// A generated specification together with concrete networks for it.
pub struct RandomSpec {
    pub source: String,
    pub networks: BTreeMap<String, AffineNetwork>,
    pub quantifiers: usize,
}

#[derive(Clone)]
enum Scoped {
    Real(String),
    Vector(String, usize),
}

struct SpecGen<'r, R: Rng> {
    rng: &'r mut R,
    nets: Vec<(String, usize, usize)>,
    fresh: usize,
}

impl<R: Rng> SpecGen<'_, R> {
    fn constant(&mut self) -> String {
        let q = small_rational(self.rng);
        literal(&q)
    }

    fn real(&mut self, scope: &[Scoped], depth: usize) -> String {
        let leaf = depth == 0 || self.rng.gen_bool(0.35);
        if leaf {
            let vars: Vec<String> = scope
                .iter()
                .map(|s| match s {
                    Scoped::Real(n) => n.clone(),
                    Scoped::Vector(n, k) => format!("{n} ! {}", self.rng.gen_range(0..*k)),
                })
                .collect();
            if !vars.is_empty() && self.rng.gen_bool(0.7) {
                return vars.choose(self.rng).unwrap().clone();
            }
            return self.constant();
        }
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let (name, m, n) = self.nets.choose(self.rng).unwrap().clone();
                let arg = self.vector(scope, m, depth - 1);
                format!("{name} {arg} ! {}", self.rng.gen_range(0..n))
            }
            4 | 5 => format!("({} + {})", self.real(scope, depth - 1), self.real(scope, depth - 1)),
            6 => format!("({} - {})", self.real(scope, depth - 1), self.real(scope, depth - 1)),
            7 | 8 => format!("({} * {})", self.constant(), self.real(scope, depth - 1)),
            _ => format!(
                "(if {} then {} else {})",
                self.boolean(scope, depth - 1),
                self.real(scope, depth - 1),
                self.real(scope, depth - 1)
            ),
        }
    }

    fn vector(&mut self, scope: &[Scoped], size: usize, depth: usize) -> String {
        let candidates: Vec<&String> = scope
            .iter()
            .filter_map(|s| match s {
                Scoped::Vector(n, k) if *k == size => Some(n),
                _ => None,
            })
            .collect();
        if !candidates.is_empty() && self.rng.gen_bool(0.5) {
            let v = (*candidates.choose(self.rng).unwrap()).clone();
            if depth > 0 && self.rng.gen_bool(0.3) {
                let elems: Vec<String> = (0..size).map(|_| self.constant()).collect();
                return format!("({v} + [{}])", elems.join(", "));
            }
            return v;
        }
        let elems: Vec<String> = (0..size).map(|_| self.real(scope, depth.saturating_sub(1))).collect();
        format!("[{}]", elems.join(", "))
    }

    fn atom(&mut self, scope: &[Scoped], depth: usize) -> String {
        let rel = ["<=", "<", ">=", ">", "==", "!="].choose(self.rng).unwrap();
        if self.rng.gen_bool(0.1) {
            let (name, m, n) = self.nets.choose(self.rng).unwrap().clone();
            let arg = self.vector(scope, m, depth.min(1));
            let other = self.vector(scope, n, 0);
            let op = if self.rng.gen_bool(0.5) { "==" } else { "!=" };
            return format!("{name} {arg} {op} {other}");
        }
        let lhs = if self.rng.gen_bool(0.6) { self.network_output(scope, depth) } else { self.real(scope, depth) };
        format!("{lhs} {rel} {}", self.real(scope, depth))
    }

    fn network_output(&mut self, scope: &[Scoped], depth: usize) -> String {
        let (name, m, n) = self.nets.choose(self.rng).unwrap().clone();
        let arg = self.vector(scope, m, depth.min(1));
        format!("{name} {arg} ! {}", self.rng.gen_range(0..n))
    }

    fn boolean(&mut self, scope: &[Scoped], depth: usize) -> String {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.atom(scope, depth.min(2));
        }
        match self.rng.gen_range(0..7) {
            0 | 1 => format!("({} and {})", self.boolean(scope, depth - 1), self.boolean(scope, depth - 1)),
            2 | 3 => format!("({} or {})", self.boolean(scope, depth - 1), self.boolean(scope, depth - 1)),
            4 => format!("(not {})", self.boolean(scope, depth - 1)),
            5 => format!(
                "(if {} then {} else {})",
                self.boolean(scope, depth - 1),
                self.boolean(scope, depth - 1),
                self.boolean(scope, depth - 1)
            ),
            _ => self.atom(scope, depth.min(2)),
        }
    }

    /// A run of same-kind quantifiers over a quantifier-free body.
    fn quantified(&mut self, exists: bool, count: usize, depth: usize) -> String {
        let mut scope = Vec::new();
        let mut prefix = String::new();
        for _ in 0..count {
            self.fresh += 1;
            let kw = if exists { "exists" } else { "forall" };
            if self.rng.gen_bool(0.5) {
                let name = format!("a{}", self.fresh);
                let _ = write!(prefix, "{kw} ({name} : Real) . ");
                scope.push(Scoped::Real(name));
            } else {
                let name = format!("v{}", self.fresh);
                let k = self.rng.gen_range(1..=3);
                let _ = write!(prefix, "{kw} ({name} : Vector Real {k}) . ");
                scope.push(Scoped::Vector(name, k));
            }
        }
        format!("({prefix}{})", self.boolean(&scope, depth))
    }
}

/// A random compilable specification: at most two networks with dimensions
/// at most 3, at most three quantifiers and boolean depth at most 5.
pub fn random_spec(rng: &mut impl Rng) -> RandomSpec {
    let mut nets = vec![("f".to_string(), rng.gen_range(1..=3), rng.gen_range(1..=3))];
    if rng.gen_bool(0.5) {
        nets.push(("g".to_string(), rng.gen_range(1..=3), rng.gen_range(1..=3)));
    }
    let mut source = String::new();
    let mut networks = BTreeMap::new();
    for (name, m, n) in &nets {
        let _ = writeln!(source, "@network {name} : Vector Real {m} -> Vector Real {n}");
        networks.insert(name.clone(), random_network(rng, name, *m, *n));
    }
    let mut g = SpecGen { rng, nets, fresh: 0 };
    let total = if g.rng.gen_bool(0.1) { 0 } else { g.rng.gen_range(1..=3) };
    let body = match g.rng.gen_range(0..4) {
        0 if total >= 2 => {
            let split = g.rng.gen_range(1..total);
            let (e1, e2) = (g.rng.gen_bool(0.5), g.rng.gen_bool(0.5));
            let op = if g.rng.gen_bool(0.5) { "and" } else { "or" };
            let depth = g.rng.gen_range(1..=4);
            format!("{} {op} {}", g.quantified(e1, split, depth), g.quantified(e2, total - split, depth))
        }
        _ if total == 0 => {
            let depth = g.rng.gen_range(1..=5);
            g.boolean(&[], depth)
        }
        _ => {
            let exists = g.rng.gen_bool(0.5);
            let depth = g.rng.gen_range(1..=5);
            g.quantified(exists, total, depth)
        }
    };
    let _ = writeln!(source, "@property p = {body}");
    RandomSpec { source, networks, quantifiers: total }
}

// ---------------------------------------------------------------------------
// Closed terms and the reference interpreter.

#[derive(Clone, Debug, PartialEq)]
pub enum RVal {
    Real(Rational),
    Bool(bool),
    Index(u64),
    Vec(Vec<RVal>),
    Clo(Vec<RVal>, Arc<Expr>),
}

fn ref_apply(f: RVal, x: RVal) -> RVal {
    match f {
        RVal::Clo(mut env, body) => {
            env.push(x);
            reference_eval(&env, &body)
        }
        other => panic!("reference: applying {other:?}"),
    }
}

/// Direct big-step evaluation of closed terms over concrete values.
pub fn reference_eval(env: &[RVal], e: &Expr) -> RVal {
    let real = |v: RVal| match v {
        RVal::Real(q) => q,
        v => panic!("reference: expected a real, found {v:?}"),
    };
    let boolean = |v: RVal| match v {
        RVal::Bool(b) => b,
        v => panic!("reference: expected a boolean, found {v:?}"),
    };
    let vector = |v: RVal| match v {
        RVal::Vec(xs) => xs,
        v => panic!("reference: expected a vector, found {v:?}"),
    };
    match e {
        Expr::Var(i) => env[env.len() - 1 - i].clone(),
        Expr::Lam(_, body) => RVal::Clo(env.to_vec(), body.clone()),
        Expr::App(f, x) => ref_apply(reference_eval(env, f), reference_eval(env, x)),
        Expr::Real(q) => RVal::Real(q.clone()),
        Expr::Bool(b) => RVal::Bool(*b),
        Expr::Index(i) => RVal::Index(*i),
        Expr::Add(x, y) => RVal::Real(real(reference_eval(env, x)) + real(reference_eval(env, y))),
        Expr::Mul(x, y) => RVal::Real(real(reference_eval(env, x)) * real(reference_eval(env, y))),
        Expr::And(x, y) => RVal::Bool(boolean(reference_eval(env, x)) & boolean(reference_eval(env, y))),
        Expr::Or(x, y) => RVal::Bool(boolean(reference_eval(env, x)) | boolean(reference_eval(env, y))),
        Expr::Not(x) => RVal::Bool(!boolean(reference_eval(env, x))),
        Expr::Eq(x, y) => RVal::Bool(reference_eval(env, x) == reference_eval(env, y)),
        Expr::Neq(x, y) => RVal::Bool(reference_eval(env, x) != reference_eval(env, y)),
        Expr::Order(op, x, y) => {
            let (a, b) = match (reference_eval(env, x), reference_eval(env, y)) {
                (RVal::Real(a), RVal::Real(b)) => (a, b),
                (RVal::Index(a), RVal::Index(b)) => (int(a as i64), int(b as i64)),
                other => panic!("reference: comparing {other:?}"),
            };
            RVal::Bool(op.holds(&a, &b))
        }
        Expr::If(c, x, y) => {
            if boolean(reference_eval(env, c)) {
                reference_eval(env, x)
            } else {
                reference_eval(env, y)
            }
        }
        Expr::Vec(xs) => RVal::Vec(xs.iter().map(|x| reference_eval(env, x)).collect()),
        Expr::At(xs, i) => match reference_eval(env, i) {
            RVal::Index(k) => vector(reference_eval(env, xs)).swap_remove(k as usize),
            v => panic!("reference: indexing with {v:?}"),
        },
        Expr::VecAdd(x, y) => RVal::Vec(
            vector(reference_eval(env, x))
                .into_iter()
                .zip(vector(reference_eval(env, y)))
                .map(|(a, b)| RVal::Real(real(a) + real(b)))
                .collect(),
        ),
        Expr::VecEq(_, x, y) => RVal::Bool(reference_eval(env, x) == reference_eval(env, y)),
        Expr::Map(f, xs) => {
            let f = reference_eval(env, f);
            RVal::Vec(vector(reference_eval(env, xs)).into_iter().map(|x| ref_apply(f.clone(), x)).collect())
        }
        Expr::Fold(f, e0, xs) => {
            let f = reference_eval(env, f);
            let mut acc = reference_eval(env, e0);
            for x in vector(reference_eval(env, xs)).into_iter().rev() {
                acc = ref_apply(ref_apply(f.clone(), x), acc);
            }
            acc
        }
        Expr::ZipWith(_, f, xs, ys) => {
            let f = reference_eval(env, f);
            let xs = vector(reference_eval(env, xs));
            let ys = vector(reference_eval(env, ys));
            RVal::Vec(xs.into_iter().zip(ys).map(|(x, y)| ref_apply(ref_apply(f.clone(), x), y)).collect())
        }
        Expr::Forall(..) | Expr::Exists(..) | Expr::NetworkApp(..) => {
            panic!("reference: quantifiers and networks are outside the closed fragment")
        }
    }
}

/// Reads a normal form back as a concrete value, if it is one.
pub fn literal_value(v: &Value) -> Option<RVal> {
    Some(match v {
        Value::Real(q) => RVal::Real(q.clone()),
        Value::Bool(b) => RVal::Bool(*b),
        Value::Index(i) => RVal::Index(*i),
        Value::VecLit(xs) => RVal::Vec(xs.iter().map(literal_value).collect::<Option<_>>()?),
        _ => return None,
    })
}

pub fn normalize_closed(e: &Expr) -> Value {
    eval(&Vec::new(), e)
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermType {
    Real,
    Bool,
    Index(u64),
    Vector(u64),
}

impl TermType {
    fn ty(&self) -> Type {
        match self {
            TermType::Real => Type::Real,
            TermType::Bool => Type::Bool,
            TermType::Index(n) => Type::Index(*n),
            TermType::Vector(n) => Type::real_vector(*n),
        }
    }
}

/// Random closed well-typed terms of bounded depth.
pub struct TermGen<'r, R: Rng> {
    pub rng: &'r mut R,
}

impl<R: Rng> TermGen<'_, R> {
    fn var_of(&mut self, scope: &[TermType], want: &TermType) -> Option<Expr> {
        let hits: Vec<usize> = (0..scope.len()).filter(|&i| &scope[scope.len() - 1 - i] == want).collect();
        hits.choose(self.rng).map(|i| Expr::Var(*i))
    }

    fn lam(&mut self, params: &[TermType], body: &TermType, scope: &[TermType], depth: usize) -> Expr {
        let mut inner = scope.to_vec();
        inner.extend(params.iter().cloned());
        let mut e = self.term(body, &inner, depth);
        for (k, p) in params.iter().enumerate().rev() {
            e = Expr::lam(Binder::new(format!("x{}", scope.len() + k), p.ty()), e);
        }
        e
    }

    pub fn term(&mut self, ty: &TermType, scope: &[TermType], depth: usize) -> Expr {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            if let Some(v) = self.var_of(scope, ty) {
                if self.rng.gen_bool(0.6) {
                    return v;
                }
            }
            return self.leaf(ty);
        }
        let d = depth - 1;
        let n = self.rng.gen_range(1..=3u64);
        let pick = self.rng.gen_range(0..8);
        if pick == 0 {
            let c = self.term(&TermType::Bool, scope, d);
            return Expr::ite(c, self.term(ty, scope, d), self.term(ty, scope, d));
        }
        if pick == 1 {
            let arg_ty = [TermType::Real, TermType::Bool, TermType::Index(n), TermType::Vector(n)]
                .choose(self.rng)
                .unwrap()
                .clone();
            let f = self.lam(std::slice::from_ref(&arg_ty), ty, scope, d);
            return Expr::app(f, self.term(&arg_ty, scope, d));
        }
        match ty {
            TermType::Real => match self.rng.gen_range(0..5) {
                0 => Expr::add(self.term(ty, scope, d), self.term(ty, scope, d)),
                1 => Expr::mul(self.term(ty, scope, d), self.term(ty, scope, d)),
                2 => Expr::at(self.term(&TermType::Vector(n), scope, d), self.term(&TermType::Index(n), scope, d)),
                3 => {
                    let f = self.lam(&[TermType::Real, TermType::Real], &TermType::Real, scope, d);
                    Expr::fold(f, self.term(ty, scope, d), self.term(&TermType::Vector(n), scope, d))
                }
                _ => self.leaf(ty),
            },
            TermType::Bool => match self.rng.gen_range(0..8) {
                0 => Expr::and(self.term(ty, scope, d), self.term(ty, scope, d)),
                1 => Expr::or(self.term(ty, scope, d), self.term(ty, scope, d)),
                2 => Expr::not(self.term(ty, scope, d)),
                3 => Expr::eq(self.term(&TermType::Real, scope, d), self.term(&TermType::Real, scope, d)),
                4 => Expr::neq(self.term(&TermType::Real, scope, d), self.term(&TermType::Real, scope, d)),
                5 => {
                    let op = *[OrderOp::Le, OrderOp::Lt, OrderOp::Ge, OrderOp::Gt].choose(self.rng).unwrap();
                    Expr::order(op, self.term(&TermType::Real, scope, d), self.term(&TermType::Real, scope, d))
                }
                6 => Expr::vec_eq(
                    n,
                    self.term(&TermType::Vector(n), scope, d),
                    self.term(&TermType::Vector(n), scope, d),
                ),
                _ => Expr::eq(self.term(&TermType::Index(n), scope, d), self.term(&TermType::Index(n), scope, d)),
            },
            TermType::Index(_) => self.leaf(ty),
            TermType::Vector(k) => match self.rng.gen_range(0..4) {
                0 => Expr::vec_add(self.term(ty, scope, d), self.term(ty, scope, d)),
                1 => {
                    let f = self.lam(&[TermType::Real], &TermType::Real, scope, d);
                    Expr::map(f, self.term(ty, scope, d))
                }
                2 => {
                    let f = self.lam(&[TermType::Real, TermType::Real], &TermType::Real, scope, d);
                    Expr::zip_with(*k, f, self.term(ty, scope, d), self.term(ty, scope, d))
                }
                _ => Expr::Vec((0..*k).map(|_| self.term(&TermType::Real, scope, d)).collect()),
            },
        }
    }

    fn leaf(&mut self, ty: &TermType) -> Expr {
        match ty {
            TermType::Real => Expr::real(small_rational(self.rng)),
            TermType::Bool => Expr::Bool(self.rng.gen_bool(0.5)),
            TermType::Index(n) => Expr::Index(self.rng.gen_range(0..*n)),
            TermType::Vector(k) => Expr::Vec((0..*k).map(|_| self.leaf(&TermType::Real)).collect()),
        }
    }
}

pub fn random_term(rng: &mut impl Rng, max_depth: usize) -> (Expr, TermType) {
    let ty = match rng.gen_range(0..4) {
        0 => TermType::Real,
        1 => TermType::Bool,
        2 => TermType::Index(rng.gen_range(1..=3)),
        _ => TermType::Vector(rng.gen_range(1..=3)),
    };
    let depth = rng.gen_range(1..=max_depth);
    let e = TermGen { rng }.term(&ty, &[], depth);
    (e, ty)
}

// ---------------------------------------------------------------------------
// Linear systems.

pub fn random_linear(rng: &mut impl Rng, vars: usize) -> ScalarLinear {
    let mut lin = ScalarLinear::constant(small_rational(rng));
    for v in 0..vars {
        if rng.gen_bool(0.7) {
            lin.add_term(v, &int(rng.gen_range(-3..=3)));
        }
    }
    lin
}

/// Up to `max_ineqs` inequalities over variables `0..vars`, mixed strict.
pub fn random_system(rng: &mut impl Rng, vars: usize, max_ineqs: usize) -> Vec<Assertion> {
    let count = rng.gen_range(1..=max_ineqs);
    (0..count).map(|_| Assertion::Ineq { strict: rng.gen_bool(0.5), lin: random_linear(rng, vars) }).collect()
}

/// `-bound <= v <= bound` for every variable.
pub fn box_constraints(vars: usize, bound: i64) -> Vec<Assertion> {
    (0..vars)
        .flat_map(|v| {
            let x = ScalarLinear::scalar_var(v);
            [
                Assertion::Ineq { strict: false, lin: x.minus(&ScalarLinear::constant(int(bound))) },
                Assertion::Ineq { strict: false, lin: ScalarLinear::constant(int(-bound)).minus(&x) },
            ]
        })
        .collect()
}

/// Whether some point of the grid `{-bound, ..., bound}` with spacing
/// `1/steps` satisfies every assertion.
pub fn grid_satisfiable(atoms: &[Assertion], vars: usize, bound: i64, steps: i64) -> bool {
    let points: Vec<Rational> = (-bound * steps..=bound * steps).map(|k| ratio(k, steps)).collect();
    let mut idx = vec![0usize; vars];
    loop {
        let model = |v: Var| Some(points[idx[v]].clone());
        if vspecc_core::oracle::lra::holds(atoms, &model) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == vars {
                return false;
            }
            idx[k] += 1;
            if idx[k] < points.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Golden rendering.

/// Every emitted query file in tree format with its manifest entry.
pub fn render_golden(source: &str) -> String {
    let prog = load(source).expect("corpus file loads");
    let mut out = String::new();
    for r in compile_program(&prog, Options::default()) {
        let c = r.expect("corpus property compiles");
        let (entry, files) = property_files(&c.compiled.ctx, &c.emitted, Format::Tree);
        out.push_str(&serde_json::to_string_pretty(&entry).unwrap());
        out.push('\n');
        for (name, body) in files {
            let _ = write!(out, "--- {name}\n{body}");
        }
    }
    out
}
