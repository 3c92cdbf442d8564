//! Exact decision procedure for conjunctions of linear constraints over the
//! reals: Gaussian elimination of equalities, then Fourier–Motzkin, with a
//! witness recovered by back-substitution.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use super::OracleError;
use crate::query::{choose_value, Assertion, ScalarLinear, Var};
use crate::rational::Rational;

/// Bounds on the work a single decision may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_vars: usize,
    pub max_constraints: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_vars: 40, max_constraints: 20_000 }
    }
}

/// `lin < 0` when strict, `lin <= 0` otherwise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ineq {
    strict: bool,
    lin: ScalarLinear,
}

impl Ineq {
    fn holds_constant(&self) -> bool {
        if self.strict {
            self.lin.constant.is_negative()
        } else {
            !self.lin.constant.is_positive()
        }
    }
}

enum Step {
    Eq(Var, ScalarLinear),
    /// Lower and upper bounds, each `(strict, value)`.
    Fm(Var, Vec<(bool, ScalarLinear)>, Vec<(bool, ScalarLinear)>),
}

fn solve_for(var: Var, lin: &ScalarLinear) -> ScalarLinear {
    let k = lin.coeffs[&var].clone();
    let mut others = lin.clone();
    others.coeffs.remove(&var);
    others.scale(&(-Rational::one() / k))
}

fn split(atoms: &[Assertion]) -> Result<(Vec<ScalarLinear>, Vec<Ineq>), OracleError> {
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    for a in atoms {
        match a {
            Assertion::Eq(l) => eqs.push(l.clone()),
            Assertion::Ineq { strict, lin } => ineqs.push(Ineq { strict: *strict, lin: lin.clone() }),
            Assertion::VecEq(_) => return Err(OracleError::Unsupported("vector equality in a lowered query".into())),
        }
    }
    Ok((eqs, ineqs))
}

/// Eliminates every equality by substitution. Returns `None` on a
/// contradiction.
fn eliminate_equalities(mut eqs: Vec<ScalarLinear>, ineqs: &mut [Ineq], steps: &mut Vec<Step>) -> Option<()> {
    while let Some(eq) = eqs.pop() {
        let Some(&var) = eq.coeffs.keys().next_back() else {
            if !eq.constant.is_zero() {
                return None;
            }
            continue;
        };
        let value = solve_for(var, &eq);
        for e in eqs.iter_mut() {
            e.substitute(var, &value);
        }
        for i in ineqs.iter_mut() {
            i.lin.substitute(var, &value);
        }
        steps.push(Step::Eq(var, value));
    }
    Some(())
}

/// Projects `var` out of a set of inequalities. Returns `None` on a
/// contradiction.
fn fm_step(var: Var, ineqs: Vec<Ineq>, steps: Option<&mut Vec<Step>>) -> Option<Vec<Ineq>> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut rest = BTreeSet::new();
    for i in ineqs {
        match i.lin.coeff(var).map(|k| k.is_positive()) {
            Some(true) => upper.push((i.strict, solve_for(var, &i.lin))),
            Some(false) => lower.push((i.strict, solve_for(var, &i.lin))),
            None => {
                rest.insert(i);
            }
        }
    }
    for (ls, l) in &lower {
        for (us, u) in &upper {
            let i = Ineq { strict: *ls || *us, lin: l.minus(u) };
            if i.lin.is_constant() {
                if !i.holds_constant() {
                    return None;
                }
            } else {
                rest.insert(i);
            }
        }
    }
    if let Some(steps) = steps {
        steps.push(Step::Fm(var, lower, upper));
    }
    Some(rest.into_iter().collect())
}

fn check_constants(ineqs: Vec<Ineq>) -> Option<Vec<Ineq>> {
    let mut out = Vec::new();
    for i in ineqs {
        if i.lin.is_constant() {
            if !i.holds_constant() {
                return None;
            }
        } else {
            out.push(i);
        }
    }
    Some(out)
}

/// Decides a conjunction of scalar constraints. On success returns a model
/// assigning every variable that occurs in `atoms`.
pub fn satisfy(atoms: &[Assertion], limits: Limits) -> Result<Option<BTreeMap<Var, Rational>>, OracleError> {
    let (eqs, mut ineqs) = split(atoms)?;
    let all_vars: BTreeSet<Var> = atoms.iter().flat_map(Assertion::vars).collect();
    let mut steps = Vec::new();
    if eliminate_equalities(eqs, &mut ineqs, &mut steps).is_none() {
        return Ok(None);
    }
    let Some(mut ineqs) = check_constants(ineqs) else { return Ok(None) };
    let remaining: BTreeSet<Var> = ineqs.iter().flat_map(|i| i.lin.vars()).collect();
    if remaining.len() > limits.max_vars {
        return Err(OracleError::TooLarge { what: "variables", size: remaining.len(), limit: limits.max_vars });
    }
    loop {
        let vars: BTreeSet<Var> = ineqs.iter().flat_map(|i| i.lin.vars()).collect();
        // the variable producing the fewest new constraints
        let Some(var) = vars.iter().copied().min_by_key(|v| {
            let pos = ineqs.iter().filter(|i| i.lin.coeff(*v).is_some_and(|k| k.is_positive())).count();
            let neg = ineqs.iter().filter(|i| i.lin.coeff(*v).is_some_and(|k| k.is_negative())).count();
            pos * neg
        }) else {
            break;
        };
        let Some(next) = fm_step(var, ineqs, Some(&mut steps)) else { return Ok(None) };
        if next.len() > limits.max_constraints {
            return Err(OracleError::TooLarge { what: "constraints", size: next.len(), limit: limits.max_constraints });
        }
        ineqs = next;
    }
    let mut model: BTreeMap<Var, Rational> = BTreeMap::new();
    for step in steps.iter().rev() {
        let eval =
            |l: &ScalarLinear| l.evaluate(&|v| Some(model.get(&v).cloned().unwrap_or_else(Rational::zero))).unwrap();
        let (var, x) = match step {
            Step::Eq(var, value) => (*var, eval(value)),
            Step::Fm(var, lower, upper) => {
                let lo = lower.iter().map(|(_, l)| eval(l)).max();
                let hi = upper.iter().map(|(_, u)| eval(u)).min();
                (*var, choose_value(lo.as_ref(), hi.as_ref()))
            }
        };
        model.insert(var, x);
    }
    for v in all_vars {
        model.entry(v).or_insert_with(Rational::zero);
    }
    Ok(Some(model))
}

/// Existentially projects `var` out of a conjunction. Returns `None` when
/// the conjunction is unsatisfiable for every value of the other variables.
pub fn project(var: Var, atoms: &[Assertion]) -> Result<Option<Vec<Assertion>>, OracleError> {
    let (mut eqs, ineqs) = split(atoms)?;
    let ineqs = if let Some(pos) = eqs.iter().position(|e| e.mentions(var)) {
        let eq = eqs.remove(pos);
        let value = solve_for(var, &eq);
        for e in eqs.iter_mut() {
            e.substitute(var, &value);
        }
        ineqs
            .into_iter()
            .map(|mut i| {
                i.lin.substitute(var, &value);
                i
            })
            .collect()
    } else {
        let Some(ineqs) = fm_step(var, ineqs, None) else { return Ok(None) };
        ineqs
    };
    let mut out = Vec::new();
    for e in eqs {
        if e.is_constant() {
            if !e.constant.is_zero() {
                return Ok(None);
            }
        } else {
            out.push(Assertion::Eq(e));
        }
    }
    let Some(ineqs) = check_constants(ineqs) else { return Ok(None) };
    out.extend(ineqs.into_iter().map(|i| Assertion::Ineq { strict: i.strict, lin: i.lin }));
    Ok(Some(out))
}

/// Whether `model` satisfies every atom exactly.
pub fn holds(atoms: &[Assertion], model: &dyn Fn(Var) -> Option<Rational>) -> bool {
    atoms.iter().all(|a| match a {
        Assertion::Eq(l) => l.evaluate(model).is_ok_and(|x| x.is_zero()),
        Assertion::Ineq { strict, lin } => {
            lin.evaluate(model).is_ok_and(|x| if *strict { x.is_negative() } else { !x.is_positive() })
        }
        Assertion::VecEq(_) => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn lin(terms: &[(Var, i64)], c: i64) -> ScalarLinear {
        let mut l = ScalarLinear::constant(int(c));
        for (v, k) in terms {
            l.add_term(*v, &int(*k));
        }
        l
    }

    fn le(terms: &[(Var, i64)], c: i64) -> Assertion {
        Assertion::Ineq { strict: false, lin: lin(terms, c) }
    }

    fn lt(terms: &[(Var, i64)], c: i64) -> Assertion {
        Assertion::Ineq { strict: true, lin: lin(terms, c) }
    }

    #[test]
    fn decides_small_systems() {
        // Y0 >= 1 and Y0 <= 0
        assert_eq!(satisfy(&[le(&[(0, -1)], 1), le(&[(0, 1)], 0)], Limits::default()).unwrap(), None);
        assert_eq!(satisfy(&[lt(&[], 0)], Limits::default()).unwrap(), None);
        let atoms = [le(&[(0, -1)], 0), Assertion::Eq(lin(&[(0, 1), (1, -1)], 0))];
        let m = satisfy(&atoms, Limits::default()).unwrap().unwrap();
        assert!(holds(&atoms, &|v| m.get(&v).cloned()));
    }

    #[test]
    fn strict_bounds_get_interior_witnesses() {
        // 0 < x < 1, x + y < 1, y > 0
        let atoms = [lt(&[(0, -1)], 0), lt(&[(0, 1)], -1), lt(&[(0, 1), (1, 1)], -1), lt(&[(1, -1)], 0)];
        let m = satisfy(&atoms, Limits::default()).unwrap().unwrap();
        assert!(holds(&atoms, &|v| m.get(&v).cloned()), "{m:?}");
        // x <= 0 and x >= 0 and x < 0
        assert_eq!(satisfy(&[le(&[(0, 1)], 0), le(&[(0, -1)], 0), lt(&[(0, 1)], 0)], Limits::default()).unwrap(), None);
    }

    #[test]
    fn projection_keeps_other_variables() {
        // x <= y, x >= 3  ⇒  3 <= y
        let out = project(0, &[le(&[(0, 1), (1, -1)], 0), le(&[(0, -1)], 3)]).unwrap().unwrap();
        assert_eq!(out, vec![le(&[(1, -1)], 3)]);
        assert_eq!(project(0, &[lt(&[(0, 1)], 0), lt(&[(0, -1)], 0)]).unwrap(), None);
    }

    #[test]
    fn guard_aborts_large_systems() {
        let atoms: Vec<Assertion> = (0..5).map(|v| le(&[(v, 1)], 0)).collect();
        let limits = Limits { max_vars: 3, max_constraints: 100 };
        assert!(matches!(satisfy(&atoms, limits), Err(OracleError::TooLarge { .. })));
    }
}
