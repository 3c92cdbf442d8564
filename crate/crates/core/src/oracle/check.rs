//! Compiles a property, decides its emitted queries against concrete
//! networks and compares the reconstructed verdict with the direct
//! semantics. Witnesses are mapped back to problem-space values and
//! validated against the unlowered queries and, for quantifier prefixes,
//! against the source property itself.

use std::collections::BTreeMap;

use thiserror::Error;

use super::decide::{decide_query_with, Verdict};
use super::lra::Limits;
use super::networks::AffineNetwork;
use super::semantics::{eval_open, eval_property, Concrete};
use super::OracleError;
use crate::backend::{postprocess, EmittedProperty, EmittedQuery, Options, PropertyOutput};
use crate::compiler::{compile_property, CompileError, Compiled};
use crate::frontend::{Expr, Type, TypedProgram};
use crate::query::{reconstruct, Assertion, Assignment, Leaf, MaybeTrivial, SolvedQuery, Tree, Var};
use crate::rational::Rational;
use crate::state::Ctx;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("property `{property}`: {error}")]
    Compile { property: String, error: CompileError },
    #[error("property `{property}`: {error}")]
    Oracle { property: String, error: OracleError },
}

/// Problem-space values recovered from one satisfiable query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub leaf: usize,
    pub query: usize,
    /// User variable values by display name.
    pub values: BTreeMap<String, Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub name: String,
    /// Truth value from the direct semantics.
    pub semantic: bool,
    /// Truth value reconstructed from the emitted queries.
    pub compiled: bool,
    pub witnesses: Vec<Witness>,
    /// Descriptions of witnesses that failed validation.
    pub witness_failures: Vec<String>,
    /// Witnesses additionally checked against the source property.
    pub source_checked: usize,
}

impl PropertyReport {
    pub fn agrees(&self) -> bool {
        self.semantic == self.compiled && self.witness_failures.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquisatReport {
    pub properties: Vec<PropertyReport>,
}

impl EquisatReport {
    pub fn all_agree(&self) -> bool {
        self.properties.iter().all(PropertyReport::agrees)
    }
}

/// Checks every property of a program.
pub fn check_program(
    prog: &TypedProgram,
    nets: &BTreeMap<String, AffineNetwork>,
    limits: Limits,
) -> Result<EquisatReport, CheckError> {
    let sigs = crate::driver::signatures(prog);
    let mut report = EquisatReport::default();
    for p in &prog.properties {
        report.properties.push(check_equisat(&p.name, &p.expr, &sigs, nets, limits)?);
    }
    Ok(report)
}

/// Compiles one property and compares both verdicts.
pub fn check_equisat(
    name: &str,
    expr: &Expr,
    signatures: &BTreeMap<String, (u64, u64)>,
    nets: &BTreeMap<String, AffineNetwork>,
    limits: Limits,
) -> Result<PropertyReport, CheckError> {
    let compiled = compile_property(signatures.clone(), expr)
        .map_err(|error| CheckError::Compile { property: name.to_string(), error })?;
    let emitted = postprocess(name, &compiled, Options::default());
    check_compiled(name, expr, &compiled, &emitted, nets, limits)
        .map_err(|error| CheckError::Oracle { property: name.to_string(), error })
}

/// Compares an already compiled and post-processed property with the
/// direct semantics of `expr`.
pub fn check_compiled(
    name: &str,
    expr: &Expr,
    compiled: &Compiled,
    emitted: &EmittedProperty,
    nets: &BTreeMap<String, AffineNetwork>,
    limits: Limits,
) -> Result<PropertyReport, OracleError> {
    let semantic = eval_property(expr, nets, limits)?;
    let mut report = PropertyReport {
        name: name.to_string(),
        semantic,
        compiled: false,
        witnesses: Vec::new(),
        witness_failures: Vec::new(),
        source_checked: 0,
    };
    let (structure, leaves) = match &emitted.output {
        PropertyOutput::Trivial(b) => {
            report.compiled = *b;
            return Ok(report);
        }
        PropertyOutput::Queries { structure, leaves } => (structure, leaves),
    };
    let source_leaves: Vec<&Leaf> = match &compiled.property {
        MaybeTrivial::NonTrivial(t) => t.atoms(),
        MaybeTrivial::Trivial(_) => Vec::new(),
    };
    let prefix = quantifier_prefix(expr);
    let mut truth = Vec::with_capacity(leaves.len());
    for (li, leaf) in leaves.iter().enumerate() {
        let mut sat = false;
        for (qi, q) in leaf.queries.iter().enumerate() {
            if let Verdict::Sat(model) = decide_query_with(&q.meta, nets, &q.body, limits)? {
                sat = true;
                let source = source_leaves.get(li).and_then(|l| l.queries.get(qi));
                let single_leaf = matches!(structure, Tree::Atom(_));
                validate(
                    &mut report,
                    compiled,
                    emitted,
                    q,
                    source,
                    &model,
                    (li, qi),
                    single_leaf.then_some(&prefix),
                    nets,
                    limits,
                )?;
            }
        }
        truth.push(sat != leaf.negated);
    }
    report.compiled = structure.evaluate(&mut |i| truth[*i]);
    Ok(report)
}

/// The leading run of same-kind real or vector quantifiers.
struct Prefix<'e> {
    exists: bool,
    binders: Vec<(String, Option<usize>)>,
    body: &'e Expr,
}

fn quantifier_prefix(expr: &Expr) -> Option<Prefix<'_>> {
    let exists = match expr {
        Expr::Exists(..) => true,
        Expr::Forall(..) => false,
        _ => return None,
    };
    let mut binders = Vec::new();
    let mut body = expr;
    while let (Expr::Exists(b, inner), true) | (Expr::Forall(b, inner), false) = (body, exists) {
        let size = match &b.ty {
            Type::Real => None,
            t => match t.real_vector_size() {
                Some(n) => Some(n as usize),
                None => break,
            },
        };
        binders.push((b.name.clone(), size));
        body = inner;
    }
    (!binders.is_empty()).then_some(Prefix { exists, binders, body })
}

#[allow(clippy::too_many_arguments)]
fn validate(
    report: &mut PropertyReport,
    compiled: &Compiled,
    emitted: &EmittedProperty,
    q: &EmittedQuery,
    source: Option<&SolvedQuery>,
    model: &BTreeMap<Var, Rational>,
    (leaf, query): (usize, usize),
    prefix: Option<&Option<Prefix<'_>>>,
    nets: &BTreeMap<String, AffineNetwork>,
    limits: Limits,
) -> Result<(), OracleError> {
    let ctx = &compiled.ctx;
    let parent = |v: Var| ctx.record(v).parent;
    let elements = |v: Var| ctx.elements(v).map(<[Var]>::to_vec);
    let mut a = Assignment::default();
    for (g, level) in q.globals.iter().enumerate() {
        a.scalars.insert(*level, model[&g].clone());
    }
    for (from, to) in &q.aliases {
        if let Some(x) = a.scalars.get(to).cloned() {
            a.scalars.insert(*from, x);
        }
    }
    let fail = |report: &mut PropertyReport, what: String| {
        report.witness_failures.push(format!("leaf {leaf}, query {query}: {what}"));
    };
    if let Err(missing) = reconstruct(&q.solutions, &mut a, &parent, &elements) {
        fail(report, format!("solution replay needs variable {}", ctx.name(missing.0)));
        return Ok(());
    }
    if let Some(source) = source {
        if !unlowered_holds(ctx, &source.query, &a) {
            fail(report, "witness violates the unlowered query".into());
        }
    }
    let values: BTreeMap<String, Rational> = emitted
        .user_names
        .iter()
        .filter(|(l, _)| !ctx.record(**l).kind.is_vector())
        .filter_map(|(l, n)| a.scalar(*l, &parent).map(|x| (n.clone(), x)))
        .collect();
    report.witnesses.push(Witness { leaf, query, values });
    if let Some(Some(prefix)) = prefix {
        if let Some(bindings) = prefix_values(ctx, prefix, &a) {
            let holds = eval_open(prefix.body, &bindings, nets, limits)?;
            report.source_checked += 1;
            if holds != prefix.exists {
                fail(report, format!("reconstructed values {bindings:?} do not witness the property"));
            }
        }
    }
    Ok(())
}

fn unlowered_holds(ctx: &Ctx, q: &crate::query::Query, a: &Assignment) -> bool {
    let parent = |v: Var| ctx.record(v).parent;
    let elements = |v: Var| ctx.elements(v).map(<[Var]>::to_vec);
    q.evaluate(&mut |atom| match atom {
        Assertion::VecEq(lin) => {
            lin.evaluate(&|v| a.vector(v, &elements)).is_ok_and(|x| x.iter().all(num_traits::Zero::is_zero))
        }
        scalar => super::lra::holds(std::slice::from_ref(scalar), &|v| a.scalar(v, &parent)),
    })
}

/// Values of the prefix binders, matched against the first user variables
/// of the context by name and shape.
fn prefix_values(ctx: &Ctx, prefix: &Prefix<'_>, a: &Assignment) -> Option<Vec<Concrete>> {
    let parent = |v: Var| ctx.record(v).parent;
    let elements = |v: Var| ctx.elements(v).map(<[Var]>::to_vec);
    let roots = ctx.vars.iter().filter(|r| r.kind.is_user() && r.parent.is_none());
    let mut out = Vec::new();
    for ((name, size), r) in prefix.binders.iter().zip(roots) {
        if &r.name != name || size.is_some() != r.kind.is_vector() {
            return None;
        }
        out.push(match size {
            None => Concrete::Real(a.scalar(r.level, &parent).unwrap_or_default()),
            Some(_) => Concrete::Vector(a.vector(r.level, &elements)?),
        });
    }
    (out.len() == prefix.binders.len()).then_some(out)
}
