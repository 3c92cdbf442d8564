//! Post-processing of compiled properties and emission of solver queries.
//!
//! Vector equalities are lowered to scalar ones, applications of the same
//! network on provably equal inputs are merged, and the surviving
//! applications are numbered into one meta-network whose inputs and outputs
//! are the global variables `X0..` and `Y0..` (0-based).

mod manifest;
mod text;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

pub use manifest::{
    emit, property_files, Format, LeafManifest, Manifest, MetaEntryManifest, PropertyManifest, QueryManifest,
};
pub use text::{parse_query, render_conjunction, render_query, FormatError};

use crate::compiler::Compiled;
use crate::normalizer::Level;
use crate::query::{Assertion, Bound, Leaf, MaybeTrivial, Query, ScalarLinear, Solution, SolvedQuery, Tree, Var};
use crate::rational::Rational;
use crate::state::{Ctx, VarKind};

/// One block of the meta-network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaEntry {
    pub network: String,
    pub inputs: usize,
    pub outputs: usize,
    /// Index of the application in the compilation context.
    pub application: usize,
}

/// Concatenated network applications. Global variable `i < M` is input `X_i`,
/// `M + j` is output `Y_j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetaNetwork {
    pub entries: Vec<MetaEntry>,
}

impl MetaNetwork {
    pub fn total_inputs(&self) -> usize {
        self.entries.iter().map(|e| e.inputs).sum()
    }

    pub fn total_outputs(&self) -> usize {
        self.entries.iter().map(|e| e.outputs).sum()
    }

    pub fn input_offset(&self, k: usize) -> usize {
        self.entries[..k].iter().map(|e| e.inputs).sum()
    }

    pub fn output_offset(&self, k: usize) -> usize {
        self.entries[..k].iter().map(|e| e.outputs).sum()
    }

    pub fn x(&self, i: usize) -> Var {
        i
    }

    pub fn y(&self, j: usize) -> Var {
        self.total_inputs() + j
    }

    pub fn var_name(&self, v: Var) -> String {
        let m = self.total_inputs();
        if v < m {
            format!("X{v}")
        } else {
            format!("Y{}", v - m)
        }
    }
}

/// One emitted query: a disjunct of a leaf, over global variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedQuery {
    pub meta: MetaNetwork,
    pub body: Query,
    /// User variable solutions over context levels, in elimination order.
    pub solutions: Vec<Solution>,
    /// Context level of each global variable.
    pub globals: Vec<Level>,
    /// Variables of merged applications, mapped to the variable they were
    /// renamed to.
    pub aliases: BTreeMap<Level, Level>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedLeaf {
    pub negated: bool,
    pub queries: Vec<EmittedQuery>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PropertyOutput {
    Trivial(bool),
    Queries { structure: Tree<usize>, leaves: Vec<EmittedLeaf> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedProperty {
    pub name: String,
    pub output: PropertyOutput,
    pub weakened_strict: bool,
    /// Display names of user variables, keyed by context level.
    pub user_names: BTreeMap<Level, String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub weaken_strict: bool,
}

/// Lowers, deduplicates and numbers every query of a compiled property.
pub fn postprocess(name: &str, compiled: &Compiled, options: Options) -> EmittedProperty {
    let ctx = &compiled.ctx;
    let output = match &compiled.property {
        MaybeTrivial::Trivial(b) => PropertyOutput::Trivial(*b),
        MaybeTrivial::NonTrivial(tree) => {
            let mut leaves = Vec::new();
            let structure = number_leaves(tree, &mut |leaf: &Leaf| {
                let queries = leaf.queries.iter().map(|q| emit_query(ctx, q, options)).collect();
                leaves.push(EmittedLeaf { negated: leaf.negated, queries });
                leaves.len() - 1
            });
            PropertyOutput::Queries { structure, leaves }
        }
    };
    EmittedProperty {
        name: name.to_string(),
        output,
        weakened_strict: options.weaken_strict,
        user_names: user_names(ctx),
    }
}

fn number_leaves(t: &Tree<Leaf>, f: &mut dyn FnMut(&Leaf) -> usize) -> Tree<usize> {
    match t {
        Tree::Atom(l) => Tree::Atom(f(l)),
        Tree::Conj(x, y) => {
            let x = number_leaves(x, f);
            Tree::conj(x, number_leaves(y, f))
        }
        Tree::Disj(x, y) => {
            let x = number_leaves(x, f);
            Tree::disj(x, number_leaves(y, f))
        }
    }
}

/// Unique display names for user variables; repeated binder names get a
/// `@level` suffix.
fn user_names(ctx: &Ctx) -> BTreeMap<Level, String> {
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for r in ctx.vars.iter().filter(|r| r.kind.is_user() && r.parent.is_none()) {
        *count.entry(r.name.as_str()).or_default() += 1;
    }
    let mut out = BTreeMap::new();
    for r in ctx.vars.iter().filter(|r| r.kind.is_user()) {
        let base = r.parent.map_or(r.level, |(p, _)| p);
        let root = &ctx.vars[base].name;
        let unique = if count[root.as_str()] > 1 { format!("{root}@{base}") } else { root.clone() };
        let name = match r.parent {
            Some((_, i)) => format!("{unique}[{i}]"),
            None => unique,
        };
        out.insert(r.level, name);
    }
    out
}

fn emit_query(ctx: &Ctx, q: &SolvedQuery, options: Options) -> EmittedQuery {
    let lowered = lower_vector_equalities(ctx, &q.query);
    let (body, solutions, aliases) = dedup_network_applications(ctx, lowered, q.solutions.clone());
    let body = dedup_conjuncts(body);
    let (meta, globals) = assign_global_indices(ctx, &body, &solutions);
    let index: BTreeMap<Level, Var> = globals.iter().enumerate().map(|(g, l)| (*l, g)).collect();
    let mut body = body.map(&mut |a| rename_assertion(&a, &|v| index[&v]));
    if options.weaken_strict {
        body.for_each_atom_mut(&mut |a| {
            if let Assertion::Ineq { strict, .. } = a {
                *strict = false;
            }
        });
    }
    EmittedQuery { meta, body, solutions, globals, aliases }
}

fn element_of(ctx: &Ctx) -> impl Fn(Var, usize) -> Var + '_ {
    |v, i| ctx.elements(v).expect("vector variable has elements")[i]
}

/// Replaces every vector equality by the conjunction of its components.
pub fn lower_vector_equalities(ctx: &Ctx, q: &Query) -> Query {
    match q {
        Tree::Atom(Assertion::VecEq(lin)) => {
            let element = element_of(ctx);
            let atoms: Vec<Query> =
                (0..lin.size()).map(|i| Tree::Atom(Assertion::Eq(lin.project(i, &element)))).collect();
            conj_chain(atoms).expect("vector equalities have at least one component")
        }
        Tree::Atom(a) => Tree::Atom(a.clone()),
        Tree::Conj(x, y) => Tree::conj(lower_vector_equalities(ctx, x), lower_vector_equalities(ctx, y)),
        Tree::Disj(x, y) => Tree::disj(lower_vector_equalities(ctx, x), lower_vector_equalities(ctx, y)),
    }
}

fn conj_chain(parts: Vec<Query>) -> Option<Query> {
    parts.into_iter().rev().reduce(|acc, p| Tree::conj(p, acc))
}

fn top_level_conjuncts(q: &Query) -> Vec<&Query> {
    match q {
        Tree::Conj(x, y) => {
            let mut out = top_level_conjuncts(x);
            out.extend(top_level_conjuncts(y));
            out
        }
        q => vec![q],
    }
}

/// Drops repeated atoms from the top-level conjunction.
fn dedup_conjuncts(q: Query) -> Query {
    let mut seen = BTreeSet::new();
    let parts: Vec<Query> = top_level_conjuncts(&q)
        .into_iter()
        .filter(|p| match p {
            Tree::Atom(a) => seen.insert(a.clone()),
            _ => true,
        })
        .cloned()
        .collect();
    conj_chain(parts).unwrap_or(q)
}

/// Reduced row-echelon form of a set of linear equalities, pivoting on the
/// highest variable of each row.
#[derive(Default)]
struct Echelon {
    pivots: BTreeMap<Var, ScalarLinear>,
}

impl Echelon {
    fn reduce(&self, lin: &ScalarLinear) -> ScalarLinear {
        let mut out = lin.clone();
        let hits: Vec<Var> = out.vars().filter(|v| self.pivots.contains_key(v)).collect();
        for v in hits {
            out.substitute(v, &self.pivots[&v]);
        }
        out
    }

    fn add(&mut self, row: &ScalarLinear) {
        let row = self.reduce(row);
        let Some((&pivot, k)) = row.coeffs.iter().next_back() else { return };
        let mut others = row.clone();
        others.coeffs.remove(&pivot);
        let value = others.scale(&(-Rational::one() / k.clone()));
        for e in self.pivots.values_mut() {
            e.substitute(pivot, &value);
        }
        self.pivots.insert(pivot, value);
    }

    fn normal_form(&self, v: Var) -> ScalarLinear {
        self.pivots.get(&v).cloned().unwrap_or_else(|| ScalarLinear::scalar_var(v))
    }
}

fn application_of(ctx: &Ctx, v: Level) -> Option<usize> {
    match &ctx.record(v).kind {
        VarKind::NetworkReal { application, .. } | VarKind::NetworkVector { application, .. } => Some(*application),
        _ => None,
    }
}

fn solution_vars(s: &Solution) -> Vec<Var> {
    match s {
        Solution::Scalar { value, .. } => value.vars().collect(),
        Solution::Vector { value, .. } => value.vars().collect(),
        Solution::Bounds { lower, upper, .. } => lower.iter().chain(upper).flat_map(|b| b.value.vars()).collect(),
        Solution::Free { .. } => Vec::new(),
    }
}

/// Applications referenced by the query or its solutions, by first occurrence.
fn applications_in(ctx: &Ctx, q: &Query, solutions: &[Solution]) -> Vec<usize> {
    let mut order = Vec::new();
    let mut push = |v: Var| {
        if let Some(a) = application_of(ctx, v) {
            if !order.contains(&a) {
                order.push(a);
            }
        }
    };
    q.for_each_atom(&mut |a| a.vars().into_iter().for_each(&mut push));
    solutions.iter().flat_map(solution_vars).for_each(push);
    order
}

/// Merges applications of one network whose inputs are equal under the
/// query's top-level equalities. The later application's variables are
/// renamed to the earlier one's; the renaming is returned alongside.
pub fn dedup_network_applications(
    ctx: &Ctx,
    q: Query,
    solutions: Vec<Solution>,
) -> (Query, Vec<Solution>, BTreeMap<Var, Var>) {
    let mut echelon = Echelon::default();
    for part in top_level_conjuncts(&q) {
        if let Tree::Atom(Assertion::Eq(lin)) = part {
            echelon.add(lin);
        }
    }
    let mut apps = applications_in(ctx, &q, &solutions);
    apps.sort_unstable();
    let inputs = |a: usize| ctx.elements(ctx.applications[a].input).expect("input vector has elements");
    let mut representatives: Vec<usize> = Vec::new();
    let mut rename: BTreeMap<Var, Var> = BTreeMap::new();
    for &b in &apps {
        let same = representatives.iter().copied().find(|&a| {
            ctx.applications[a].network == ctx.applications[b].network
                && inputs(a).iter().zip(inputs(b)).all(|(x, y)| echelon.normal_form(*x) == echelon.normal_form(*y))
        });
        match same {
            Some(a) => {
                let (pa, pb) = (&ctx.applications[a], &ctx.applications[b]);
                for (from, to) in [(pb.input, pa.input), (pb.output, pa.output)] {
                    rename.insert(from, to);
                    let (fs, ts) = (ctx.elements(from).unwrap(), ctx.elements(to).unwrap());
                    rename.extend(fs.iter().copied().zip(ts.iter().copied()));
                }
            }
            None => representatives.push(b),
        }
    }
    if rename.is_empty() {
        return (q, solutions, rename);
    }
    let f = |v: Var| rename.get(&v).copied().unwrap_or(v);
    let q = q.map(&mut |a| rename_assertion(&a, &f));
    let solutions = solutions.iter().map(|s| rename_solution(s, &f)).collect();
    (q, solutions, rename)
}

fn rename_linear<C: crate::query::Constant>(
    lin: &crate::query::LinearExpr<C>,
    f: &dyn Fn(Var) -> Var,
) -> crate::query::LinearExpr<C> {
    let mut out = crate::query::LinearExpr { coeffs: BTreeMap::new(), constant: lin.constant.clone() };
    for (v, k) in &lin.coeffs {
        out.add_term(f(*v), k);
    }
    out
}

pub fn rename_assertion(a: &Assertion, f: &dyn Fn(Var) -> Var) -> Assertion {
    match a {
        Assertion::Eq(l) => Assertion::Eq(rename_linear(l, f)),
        Assertion::Ineq { strict, lin } => Assertion::Ineq { strict: *strict, lin: rename_linear(lin, f) },
        Assertion::VecEq(l) => Assertion::VecEq(rename_linear::<Vec<Rational>>(l, f)),
    }
}

fn rename_solution(s: &Solution, f: &dyn Fn(Var) -> Var) -> Solution {
    let bounds =
        |bs: &[Bound]| bs.iter().map(|b| Bound { strict: b.strict, value: rename_linear(&b.value, f) }).collect();
    match s {
        Solution::Scalar { var, value } => Solution::Scalar { var: *var, value: rename_linear(value, f) },
        Solution::Vector { var, value } => Solution::Vector { var: *var, value: rename_linear(value, f) },
        Solution::Bounds { var, lower, upper } => {
            Solution::Bounds { var: *var, lower: bounds(lower), upper: bounds(upper) }
        }
        Solution::Free { var } => Solution::Free { var: *var },
    }
}

/// Numbers the applications a query uses into a meta-network. Returns the
/// context level of each global variable.
pub fn assign_global_indices(ctx: &Ctx, q: &Query, solutions: &[Solution]) -> (MetaNetwork, Vec<Level>) {
    let apps = applications_in(ctx, q, solutions);
    let mut meta = MetaNetwork::default();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for a in apps {
        let app = &ctx.applications[a];
        let input = ctx.elements(app.input).unwrap();
        let output = ctx.elements(app.output).unwrap();
        meta.entries.push(MetaEntry {
            network: app.network.clone(),
            inputs: input.len(),
            outputs: output.len(),
            application: a,
        });
        xs.extend_from_slice(input);
        ys.extend_from_slice(output);
    }
    xs.extend(ys);
    (meta, xs)
}

/// Standard distribution into a disjunction of conjunctions.
pub fn to_dnf<A: Clone>(t: &Tree<A>) -> Vec<Vec<A>> {
    match t {
        Tree::Atom(a) => vec![vec![a.clone()]],
        Tree::Disj(x, y) => {
            let mut out = to_dnf(x);
            out.extend(to_dnf(y));
            out
        }
        Tree::Conj(x, y) => {
            let (l, r) = (to_dnf(x), to_dnf(y));
            let mut out = Vec::with_capacity(l.len() * r.len());
            for a in &l {
                for b in &r {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    out.push(c);
                }
            }
            out
        }
    }
}

/// Renders a solution value with user and global names.
pub fn render_linear(lin: &ScalarLinear, names: &dyn Fn(Var) -> String) -> String {
    use num_traits::Zero;
    if lin.is_constant() {
        return crate::rational::format_rational(&lin.constant);
    }
    let terms = crate::query::render_terms(&lin.coeffs, names);
    if lin.constant.is_zero() {
        terms
    } else {
        format!("{terms} + {}", crate::rational::format_rational(&lin.constant))
    }
}

/// Per-element scalar solutions, in elimination order.
pub fn scalar_solutions(ctx: &Ctx, solutions: &[Solution]) -> Vec<Solution> {
    let element = element_of(ctx);
    let mut out = Vec::new();
    for s in solutions {
        match s {
            Solution::Vector { var, value } => {
                let elems = ctx.elements(*var).expect("vector variable has elements");
                for (i, e) in elems.iter().enumerate() {
                    out.push(Solution::Scalar { var: *e, value: value.project(i, &element) });
                }
            }
            s => out.push(s.clone()),
        }
    }
    out
}
