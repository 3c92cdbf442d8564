//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so the verdicts always reach the test log.

mod common;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use vspecc_core::backend::{property_files, scalar_solutions, Format, MetaEntry, MetaNetwork, Options, PropertyOutput};
use vspecc_core::compiler::{find_constraints, fourier_motzkin};
use vspecc_core::driver::{compile_program, signatures};
use vspecc_core::frontend::{load, FrontendError};
use vspecc_core::normalizer::quote;
use vspecc_core::oracle::{check_program, decide_query, AffineNetwork, Limits, Verdict};
use vspecc_core::query::{Assertion, MaybeTrivial, Query, ScalarLinear, Solution, Tree};
use vspecc_core::rational::int;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const RANDOM_SPECS: usize = 120;
const SEED: u64 = 0x5eed;

fn rejection_class(source: &str) -> Option<String> {
    let prog = match load(source) {
        Ok(p) => p,
        Err(FrontendError::Type(t)) => return Some(t.class().to_string()),
        Err(e) => return Some(format!("{e}")),
    };
    compile_program(&prog, Options::default()).into_iter().find_map(|r| r.err()).map(|e| e.error.class().to_string())
}

fn corpus_examples() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    for (name, class) in
        [("example1", "NonLinearityError"), ("example2", "AlternatingQuantifiers"), ("example3", "QuantifiedFunction")]
    {
        match rejection_class(&common::corpus(name)) {
            Some(c) if c == class => {}
            other => problems.push(format!("{name} rejected as {other:?}, expected {class}")),
        }
    }
    for k in 4..=9 {
        let name = format!("example{k}");
        if let Some(c) = rejection_class(&common::corpus(&name)) {
            problems.push(format!("{name} rejected as {c}"));
            continue;
        }
        let golden = common::workspace_root().join(format!("crates/core/tests/golden/{name}.txt"));
        match std::fs::read_to_string(&golden) {
            Ok(g) if g == common::render_golden(&common::corpus(&name)) => {}
            Ok(_) => problems.push(format!("{name} differs from its golden")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {elapsed:?}"));
    }
    if problems.is_empty() {
        Ok(format!("9 examples in {elapsed:.2?}"))
    } else {
        Err(problems.join("; "))
    }
}

struct RandomCorpus {
    specs: Vec<common::RandomSpec>,
}

fn random_corpus() -> RandomCorpus {
    let mut rng = common::rng(SEED);
    RandomCorpus { specs: (0..RANDOM_SPECS).map(|_| common::random_spec(&mut rng)).collect() }
}

fn equisat_gate(corpus: &RandomCorpus) -> Outcome {
    let start = Instant::now();
    let mut properties = 0;
    let mut witnesses = 0;
    for (i, spec) in corpus.specs.iter().enumerate() {
        let prog = load(&spec.source).map_err(|e| format!("spec {i} does not load: {e}\n{}", spec.source))?;
        let report = check_program(&prog, &spec.networks, Limits::default())
            .map_err(|e| format!("spec {i}: {e}\n{}", spec.source))?;
        for p in &report.properties {
            if !p.agrees() {
                return Err(format!(
                    "spec {i} disagrees (semantics {}, queries {}, {:?})\n{}",
                    p.semantic, p.compiled, p.witness_failures, spec.source
                ));
            }
            properties += 1;
            witnesses += p.witnesses.len();
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(60) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{properties} properties agree, {witnesses} witnesses validated, {elapsed:.2?}"))
}

struct ScalingRun {
    vector_substitutions: usize,
    input_solutions: usize,
    visits: usize,
    elapsed: Duration,
}

fn scaling_run(n: usize) -> Result<ScalingRun, String> {
    let c: Vec<String> = (0..n).map(|i| format!("{}", i % 7)).collect();
    let source = format!(
        "@network f : Vector Real {n} -> Vector Real 1\n@property p = forall (a : Vector Real {n}) . f (a .+. [{}]) ! 0 >= 0\n",
        c.join(", ")
    );
    let prog = load(&source).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let compiled = compile_program(&prog, Options::default()).remove(0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let PropertyOutput::Queries { leaves, .. } = &compiled.emitted.output else {
        return Err("property compiled to a constant".into());
    };
    let query = &leaves[0].queries[0];
    let inputs = &query.globals[..query.meta.total_inputs()];
    let input_solutions = scalar_solutions(&compiled.compiled.ctx, &query.solutions)
        .iter()
        .filter(|s| matches!(s, Solution::Scalar { value, .. } if value.vars().any(|v| inputs.contains(&v))))
        .count();
    let stats = &compiled.compiled.ctx.stats;
    Ok(ScalingRun {
        vector_substitutions: stats.vector_substitutions,
        input_solutions,
        visits: stats.substitution_visits,
        elapsed,
    })
}

fn scaling() -> Outcome {
    let runs: Vec<(usize, ScalingRun)> =
        [10, 100, 1000].into_iter().map(|n| scaling_run(n).map(|r| (n, r))).collect::<Result<_, _>>()?;
    let big = &runs[2].1;
    let mut problems = Vec::new();
    if big.vector_substitutions != 1 {
        problems.push(format!("{} vector substitutions", big.vector_substitutions));
    }
    if big.input_solutions != 1000 {
        problems.push(format!("{} scalar input equalities", big.input_solutions));
    }
    if big.elapsed >= Duration::from_secs(2) {
        problems.push(format!("took {:?}", big.elapsed));
    }
    let per_element: Vec<f64> = runs.iter().map(|(n, r)| r.visits as f64 / *n as f64).collect();
    let lo = per_element.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = per_element.iter().cloned().fold(0.0, f64::max);
    if hi > 2.0 * lo {
        problems.push(format!("visits per element {per_element:?} vary by more than 2x"));
    }
    let visits: Vec<usize> = runs.iter().map(|(_, r)| r.visits).collect();
    if problems.is_empty() {
        Ok(format!("1 vector substitution, 1000 input equalities, {:.2?}, visits {visits:?}", big.elapsed))
    } else {
        Err(problems.join("; "))
    }
}

fn le(v: usize, w: usize) -> Query {
    let mut lin = ScalarLinear::scalar_var(v);
    lin.add_term(w, &int(1));
    Tree::Atom(Assertion::Ineq { strict: false, lin })
}

fn balanced(d: usize, next: &mut usize) -> Query {
    if d == 0 {
        *next += 1;
        return le(0, 10 + *next);
    }
    Tree::disj(balanced(d - 1, next), balanced(d - 1, next))
}

fn dnf_avoidance() -> Outcome {
    let mut counts = Vec::new();
    for d in 2..=8 {
        let eq = Tree::Atom(Assertion::Eq(ScalarLinear::scalar_var(0).minus(&ScalarLinear::scalar_var(1))));
        let q = Tree::conj(eq, balanced(d, &mut 0));
        let found = find_constraints(0, &q);
        if found.len() != 1 || !found[0].is_equality() {
            return Err(format!("depth {d}: {} constrained queries", found.len()));
        }
        counts.push(found.len());
    }
    Ok(format!("depths 2..=8 give {counts:?}"))
}

fn deduplication() -> Outcome {
    let prog = load(&common::corpus("example9")).map_err(|e| e.to_string())?;
    let c = compile_program(&prog, Options::default()).remove(0).map_err(|e| e.to_string())?;
    let (entry, _) = property_files(&c.compiled.ctx, &c.emitted, Format::Dnf);
    let lengths: Vec<usize> = entry.leaves.iter().flat_map(|l| &l.queries).map(|q| q.meta_network.len()).collect();
    if lengths == [1] {
        Ok("example9 meta-network has 1 block".into())
    } else {
        Err(format!("meta-network lengths {lengths:?}"))
    }
}

fn free_inputs() -> (MetaNetwork, BTreeMap<String, AffineNetwork>) {
    let z = AffineNetwork::new("z", vec![vec![int(0); 3]], vec![int(0)]).unwrap();
    let meta = MetaNetwork { entries: vec![MetaEntry { network: "z".into(), inputs: 3, outputs: 1, application: 0 }] };
    (meta, BTreeMap::from([("z".to_string(), z)]))
}

fn conjunction(atoms: &[Assertion]) -> Query {
    atoms
        .iter()
        .cloned()
        .map(Tree::Atom)
        .reduce(Tree::conj)
        .unwrap_or_else(|| Tree::Atom(Assertion::Eq(ScalarLinear::zero())))
}

/// One elimination step: the bound-free atoms pass through.
fn eliminate(var: usize, atoms: &[Assertion]) -> Option<Vec<Assertion>> {
    let (with, without): (Vec<_>, Vec<_>) = atoms.iter().cloned().partition(|a| a.mentions(var));
    if with.is_empty() {
        return Some(without);
    }
    match fourier_motzkin(var, &with).0 {
        MaybeTrivial::Trivial(false) => None,
        MaybeTrivial::Trivial(true) => Some(without),
        MaybeTrivial::NonTrivial(q) => Some(without.into_iter().chain(q.atoms().into_iter().cloned()).collect()),
    }
}

fn sat(
    meta: &MetaNetwork,
    nets: &BTreeMap<String, AffineNetwork>,
    atoms: Option<&[Assertion]>,
) -> Result<bool, String> {
    match atoms {
        None => Ok(false),
        Some(atoms) => decide_query(meta, nets, &conjunction(atoms))
            .map(|v| matches!(v, Verdict::Sat(_)))
            .map_err(|e| e.to_string()),
    }
}

fn fourier_motzkin_systems() -> Outcome {
    let (meta, nets) = free_inputs();
    let mut rng = common::rng(SEED + 6);
    let (mut satisfiable, mut grid_hits) = (0, 0);
    for i in 0..500 {
        let vars = rng.gen_range(1..=3);
        let mut system = common::random_system(&mut rng, vars, 6);
        let boxed = rng.gen_bool(0.5);
        if boxed {
            system.extend(common::box_constraints(vars, 2));
        }
        let before = sat(&meta, &nets, Some(&system))?;
        let var = rng.gen_range(0..vars);
        let once = eliminate(var, &system);
        if sat(&meta, &nets, once.as_deref())? != before {
            return Err(format!("system {i}: eliminating X{var} changed the verdict of {system:?}"));
        }
        let mut full = Some(system.clone());
        for v in 0..vars {
            full = full.and_then(|atoms| eliminate(v, &atoms));
        }
        let full_sat = match &full {
            None => false,
            Some(rest) => rest.iter().all(|a| a.decide_constant() == Some(true)),
        };
        if full_sat != before {
            return Err(format!("system {i}: full elimination gives {full_sat}, decision procedure {before}"));
        }
        if boxed {
            let hit = common::grid_satisfiable(&system, vars, 2, 6);
            if hit && !full_sat {
                return Err(format!("system {i}: grid point satisfies a system eliminated to false"));
            }
            grid_hits += usize::from(hit);
        }
        satisfiable += usize::from(before);
    }
    Ok(format!("500 systems, {satisfiable} satisfiable, {grid_hits} confirmed on the grid"))
}

fn structural_audits(corpus: &RandomCorpus) -> Outcome {
    let (mut impossible, mut blocking, mut properties) = (0, 0, 0);
    let mut sources: Vec<String> = corpus.specs.iter().map(|s| s.source.clone()).collect();
    sources.extend(
        ["example4", "example5", "example6", "example7", "example7b", "example8", "example9"].map(common::corpus),
    );
    for source in &sources {
        let prog = load(source).map_err(|e| e.to_string())?;
        let _ = signatures(&prog);
        for r in compile_program(&prog, Options::default()) {
            let c = r.map_err(|e| format!("{e}\n{source}"))?;
            impossible += c.compiled.ctx.stats.impossible_hits;
            blocking += c.compiled.ctx.stats.blocking_violations;
            properties += 1;
        }
    }
    if impossible == 0 && blocking == 0 {
        Ok(format!("{properties} properties, 0 impossible hits, 0 blocking violations"))
    } else {
        Err(format!("{impossible} impossible hits, {blocking} blocking violations"))
    }
}

fn normalizer_oracle() -> Outcome {
    let mut rng = common::rng(SEED + 8);
    let mut by_type = BTreeMap::new();
    for i in 0..500 {
        let (term, ty) = common::random_term(&mut rng, 6);
        let expected = common::reference_eval(&[], &term);
        let value = common::normalize_closed(&term);
        match common::literal_value(&value) {
            Some(v) if v == expected => {}
            Some(v) => return Err(format!("term {i} {term:?}: normalizer {v:?}, reference {expected:?}")),
            None => return Err(format!("term {i} {term:?}: normal form {:?} is not a literal", quote(0, &value))),
        }
        *by_type.entry(format!("{ty:?}").split('(').next().unwrap().to_string()).or_insert(0) += 1;
    }
    Ok(format!("500 terms agree {by_type:?}"))
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn main() -> ExitCode {
    let corpus = random_corpus();
    let criteria: Vec<Criterion> = vec![
        ("examples compile against goldens", Box::new(corpus_examples)),
        ("random specs are equisatisfiable", Box::new(|| equisat_gate(&corpus))),
        ("vector substitution scales linearly", Box::new(scaling)),
        ("equalities short-circuit disjunctions", Box::new(dnf_avoidance)),
        ("example9 deduplicates to one block", Box::new(deduplication)),
        ("Fourier-Motzkin preserves satisfiability", Box::new(fourier_motzkin_systems)),
        ("no impossible branches or blocked arguments", Box::new(|| structural_audits(&corpus))),
        ("normalizer agrees with the reference interpreter", Box::new(normalizer_oracle)),
    ];
    let mut report = String::new();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(p.as_ref()))));
        let (verdict, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        let _ = writeln!(report, "criterion {}: {verdict}: {name}: {detail}", i + 1);
    }
    print!("{report}");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
