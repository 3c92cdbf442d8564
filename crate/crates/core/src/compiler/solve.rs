//! Eliminating one user variable from a query: constraint discovery,
//! equality substitution and Fourier–Motzkin elimination.

use std::collections::BTreeMap;

use num_traits::{One, Signed};

use crate::query::{
    and_trivial, Assertion, Bound, MaybeTrivial, Query, QuerySet, ScalarLinear, Solution, SolvedQuery, Tree, Var,
    VectorLinear,
};
use crate::rational::Rational;
use crate::state::Ctx;

/// A query split into the strongest constraints found on one variable and
/// the remainder they are conjoined with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstrainedQuery {
    Equality { eq: Assertion, rest: MaybeTrivial<Query> },
    Inequalities { ineqs: Vec<Assertion>, rest: MaybeTrivial<Query> },
    NoConstraints(Query),
}

impl ConstrainedQuery {
    pub fn is_equality(&self) -> bool {
        matches!(self, ConstrainedQuery::Equality { .. })
    }
}

/// Whether `a` constrains `var`. Vector variables count only inside vector
/// equalities; their elements are separate variables.
pub fn references(var: Var, a: &Assertion) -> bool {
    a.mentions(var)
}

fn tree_references(var: Var, q: &Query) -> bool {
    match q {
        Tree::Atom(a) => references(var, a),
        Tree::Conj(x, y) | Tree::Disj(x, y) => tree_references(var, x) || tree_references(var, y),
    }
}

fn conj(x: Query, y: Query) -> Query {
    Tree::conj(x, y)
}

/// Splits `query` into disjuncts, each with a consistent set of constraints
/// on `var`.
pub fn find_constraints(var: Var, query: &Query) -> Vec<ConstrainedQuery> {
    if !tree_references(var, query) {
        return vec![ConstrainedQuery::NoConstraints(query.clone())];
    }
    match query {
        Tree::Atom(a) => vec![match a {
            Assertion::Eq(_) | Assertion::VecEq(_) => {
                ConstrainedQuery::Equality { eq: a.clone(), rest: MaybeTrivial::Trivial(true) }
            }
            Assertion::Ineq { .. } => {
                ConstrainedQuery::Inequalities { ineqs: vec![a.clone()], rest: MaybeTrivial::Trivial(true) }
            }
        }],
        Tree::Disj(x, y) => {
            let mut out = find_constraints(var, x);
            out.extend(find_constraints(var, y));
            out
        }
        Tree::Conj(x, y) => {
            let (eqs_lhs, remaining_lhs) = partition(find_constraints(var, x), y, Side::Left);
            if remaining_lhs.is_empty() {
                return eqs_lhs;
            }
            let (eqs_rhs, remaining_rhs) = partition(find_constraints(var, y), x, Side::Right);
            if remaining_rhs.is_empty() {
                return eqs_rhs;
            }
            let mut out = eqs_lhs;
            out.extend(eqs_rhs);
            for l in &remaining_lhs {
                for r in &remaining_rhs {
                    out.push(merge(l.clone(), r.clone()));
                }
            }
            out
        }
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

/// Equality-constrained results absorb the whole opposite subtree.
fn partition(
    results: Vec<ConstrainedQuery>,
    other: &Query,
    side: Side,
) -> (Vec<ConstrainedQuery>, Vec<ConstrainedQuery>) {
    let mut eqs = Vec::new();
    let mut remaining = Vec::new();
    for c in results {
        match c {
            ConstrainedQuery::Equality { eq, rest } => {
                let other = MaybeTrivial::NonTrivial(other.clone());
                let rest = match side {
                    Side::Left => and_trivial(conj, rest, other),
                    Side::Right => and_trivial(conj, other, rest),
                };
                eqs.push(ConstrainedQuery::Equality { eq, rest });
            }
            c => remaining.push(c),
        }
    }
    (eqs, remaining)
}

pub fn merge(c1: ConstrainedQuery, c2: ConstrainedQuery) -> ConstrainedQuery {
    use ConstrainedQuery::*;
    use MaybeTrivial::NonTrivial;
    match (c1, c2) {
        (NoConstraints(t1), NoConstraints(t2)) => NoConstraints(Tree::conj(t1, t2)),
        (NoConstraints(t1), Inequalities { ineqs, rest }) => {
            Inequalities { ineqs, rest: and_trivial(conj, NonTrivial(t1), rest) }
        }
        (Inequalities { ineqs, rest }, NoConstraints(t2)) => {
            Inequalities { ineqs, rest: and_trivial(conj, rest, NonTrivial(t2)) }
        }
        (Inequalities { ineqs: mut i1, rest: t1 }, Inequalities { ineqs: i2, rest: t2 }) => {
            i1.extend(i2);
            Inequalities { ineqs: i1, rest: and_trivial(conj, t1, t2) }
        }
        (c1, c2) => panic!("merge of equality-constrained queries: {c1:?}, {c2:?}"),
    }
}

/// Simultaneous substitution of scalar and vector variables.
#[derive(Default)]
struct Substitution {
    scalars: BTreeMap<Var, ScalarLinear>,
    vectors: BTreeMap<Var, VectorLinear>,
}

impl Substitution {
    /// Applies the substitution and returns the number of coefficients visited.
    fn apply(&self, a: &mut Assertion) -> usize {
        match a {
            Assertion::Eq(lin) | Assertion::Ineq { lin, .. } => {
                let mut visits = lin.coeffs.len();
                let hits: Vec<Var> = lin.vars().filter(|v| self.scalars.contains_key(v)).collect();
                for v in hits {
                    visits += lin.substitute(v, &self.scalars[&v]);
                }
                visits
            }
            Assertion::VecEq(lin) => {
                let mut visits = lin.coeffs.len();
                let hits: Vec<Var> = lin.vars().filter(|v| self.vectors.contains_key(v)).collect();
                for v in hits {
                    visits += lin.substitute(v, &self.vectors[&v]);
                }
                visits
            }
        }
    }
}

/// Rebuilds a tree atom by atom, deciding atoms left without variables.
fn rewrite(q: Query, f: &mut dyn FnMut(&mut Assertion)) -> MaybeTrivial<Query> {
    q.map_trivial(&mut |mut a| {
        f(&mut a);
        match a.decide_constant() {
            Some(b) => MaybeTrivial::Trivial(b),
            None => MaybeTrivial::NonTrivial(Tree::Atom(a)),
        }
    })
}

fn solved_scalar(var: Var, lin: &ScalarLinear) -> ScalarLinear {
    let k = lin.coeffs[&var].clone();
    let mut others = lin.clone();
    others.coeffs.remove(&var);
    others.scale(&(-Rational::one() / k))
}

fn solved_vector(var: Var, lin: &VectorLinear) -> VectorLinear {
    let k = lin.coeffs[&var].clone();
    let mut others = lin.clone();
    others.coeffs.remove(&var);
    others.scale(&(-Rational::one() / k))
}

/// Eliminates `var` from one constrained query. `solutions` are those
/// already recorded for the query the constraints came from.
pub fn solve_constraints(
    ctx: &mut Ctx,
    var: Var,
    cq: ConstrainedQuery,
    solutions: &[Solution],
) -> MaybeTrivial<QuerySet> {
    let with = |query: Query, extra: Vec<Solution>| {
        let mut s = solutions.to_vec();
        s.extend(extra);
        SolvedQuery { query, solutions: s }
    };
    match cq {
        ConstrainedQuery::Equality { eq, rest } => {
            let mut subst = Substitution::default();
            let solution = match &eq {
                Assertion::Eq(lin) => {
                    let value = solved_scalar(var, lin);
                    ctx.stats.scalar_substitutions += 1;
                    ctx.stats.substitution_visits += value.coeffs.len() + 1;
                    subst.scalars.insert(var, value.clone());
                    Solution::Scalar { var, value }
                }
                Assertion::VecEq(lin) => {
                    let value = solved_vector(var, lin);
                    ctx.stats.vector_substitutions += 1;
                    ctx.stats.substitution_visits += value.coeffs.len() + value.size();
                    let element = |v: Var, i: usize| ctx.elements(v).expect("vector variable has elements")[i];
                    let mut visits = 0;
                    for (i, e) in ctx.elements(var).unwrap_or_default().iter().enumerate() {
                        let projected = value.project(i, &element);
                        visits += projected.coeffs.len() + 1;
                        subst.scalars.insert(*e, projected);
                    }
                    ctx.stats.substitution_visits += visits;
                    subst.vectors.insert(var, value.clone());
                    Solution::Vector { var, value }
                }
                Assertion::Ineq { .. } => unreachable!("inequalities are not equality constraints"),
            };
            let rest = match rest {
                MaybeTrivial::NonTrivial(q) => {
                    let mut visits = 0;
                    let out = rewrite(q, &mut |a| visits += 1 + subst.apply(a));
                    ctx.stats.substitution_visits += visits;
                    out
                }
                t => t,
            };
            match rest {
                MaybeTrivial::NonTrivial(q) => MaybeTrivial::NonTrivial(vec![with(q, vec![solution])]),
                MaybeTrivial::Trivial(b) => MaybeTrivial::Trivial(b),
            }
        }
        ConstrainedQuery::Inequalities { ineqs, rest } => {
            ctx.stats.fourier_motzkin_eliminations += 1;
            let (eliminated, lower, upper) = fourier_motzkin(var, &ineqs);
            let solution = Solution::Bounds { var, lower, upper };
            match and_trivial(conj, rest, eliminated) {
                MaybeTrivial::NonTrivial(q) => MaybeTrivial::NonTrivial(vec![with(q, vec![solution])]),
                MaybeTrivial::Trivial(b) => MaybeTrivial::Trivial(b),
            }
        }
        ConstrainedQuery::NoConstraints(query) => match ctx.elements(var).map(<[Var]>::to_vec) {
            None => MaybeTrivial::NonTrivial(vec![with(query, vec![Solution::Free { var }])]),
            Some(elements) => elements
                .into_iter()
                .fold(MaybeTrivial::NonTrivial(vec![with(query, vec![])]), |qs, e| solve_variable(ctx, qs, e)),
        },
    }
}

/// Eliminates `var` from every query of a set.
pub fn solve_variable(ctx: &mut Ctx, queries: MaybeTrivial<QuerySet>, var: Var) -> MaybeTrivial<QuerySet> {
    let MaybeTrivial::NonTrivial(queries) = queries else {
        return queries;
    };
    let mut out = Vec::new();
    for sq in queries {
        for cq in find_constraints(var, &sq.query) {
            match solve_constraints(ctx, var, cq, &sq.solutions) {
                MaybeTrivial::Trivial(true) => return MaybeTrivial::Trivial(true),
                MaybeTrivial::Trivial(false) => {}
                MaybeTrivial::NonTrivial(qs) => out.extend(qs),
            }
        }
    }
    if out.is_empty() {
        MaybeTrivial::Trivial(false)
    } else {
        MaybeTrivial::NonTrivial(out)
    }
}

/// Projects `var` out of a conjunction of inequalities that all mention it.
/// Returns the combined system together with the bounds on `var`, each
/// expressed over the remaining variables.
pub fn fourier_motzkin(var: Var, ineqs: &[Assertion]) -> (MaybeTrivial<Query>, Vec<Bound>, Vec<Bound>) {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for a in ineqs {
        let Assertion::Ineq { strict, lin } = a else {
            panic!("Fourier–Motzkin over a non-inequality {a:?}");
        };
        let k = lin.coeffs[&var].clone();
        // k·var + r (<|<=) 0  ⇔  var (<|<=) -r/k when k > 0, reversed otherwise
        let value = solved_scalar(var, lin);
        let bound = Bound { strict: *strict, value };
        if k.is_positive() {
            upper.push(bound);
        } else {
            lower.push(bound);
        }
    }
    let mut combined: Vec<Assertion> = Vec::new();
    for l in &lower {
        for u in &upper {
            let a = Assertion::Ineq { strict: l.strict || u.strict, lin: l.value.minus(&u.value) };
            match a.decide_constant() {
                Some(true) => {}
                Some(false) => return (MaybeTrivial::Trivial(false), lower, upper),
                None => {
                    if !combined.contains(&a) {
                        combined.push(a)
                    }
                }
            }
        }
    }
    let tree = combined
        .into_iter()
        .rev()
        .map(Tree::Atom)
        .reduce(|acc, a| Tree::conj(a, acc))
        .map_or(MaybeTrivial::Trivial(true), MaybeTrivial::NonTrivial);
    (tree, lower, upper)
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

    fn eq(terms: &[(Var, i64)], c: i64) -> Query {
        Tree::Atom(Assertion::Eq(lin(terms, c)))
    }

    fn le(terms: &[(Var, i64)], c: i64) -> Query {
        Tree::Atom(Assertion::Ineq { strict: false, lin: lin(terms, c) })
    }

    fn balanced(d: usize, leaf: &mut usize) -> Query {
        if d == 0 {
            *leaf += 1;
            return le(&[(0, 1), (10 + *leaf, 1)], 0);
        }
        Tree::disj(balanced(d - 1, leaf), balanced(d - 1, leaf))
    }

    #[test]
    fn atom_constraints() {
        let c = find_constraints(0, &le(&[(0, -1)], 0));
        assert!(
            matches!(&c[..], [ConstrainedQuery::Inequalities { ineqs, rest: MaybeTrivial::Trivial(true) }] if ineqs.len() == 1)
        );
        let c = find_constraints(0, &le(&[(1, 1)], 0));
        assert_eq!(c, vec![ConstrainedQuery::NoConstraints(le(&[(1, 1)], 0))]);
    }

    #[test]
    fn equality_short_circuits_disjunctions() {
        for d in 2..=8 {
            let q = Tree::conj(eq(&[(0, 1), (1, -1)], 0), balanced(d, &mut 0));
            let c = find_constraints(0, &q);
            assert_eq!(c.len(), 1, "depth {d}");
            assert!(c[0].is_equality());
        }
    }

    #[test]
    fn disjoint_equalities_split() {
        let q = Tree::disj(eq(&[(0, 1), (1, -1)], 0), eq(&[(0, 1), (2, -1)], 0));
        let c = find_constraints(0, &q);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(ConstrainedQuery::is_equality));
    }

    #[test]
    fn merge_cases() {
        use ConstrainedQuery::*;
        let t1 = le(&[(1, 1)], 0);
        let t2 = le(&[(2, 1)], 0);
        assert_eq!(
            merge(NoConstraints(t1.clone()), NoConstraints(t2.clone())),
            NoConstraints(Tree::conj(t1.clone(), t2.clone()))
        );
        let i = Assertion::Ineq { strict: false, lin: lin(&[(0, 1)], 0) };
        let m = merge(
            NoConstraints(t1.clone()),
            Inequalities { ineqs: vec![i.clone()], rest: MaybeTrivial::Trivial(true) },
        );
        assert_eq!(m, Inequalities { ineqs: vec![i.clone()], rest: MaybeTrivial::NonTrivial(t1.clone()) });
        let m = merge(
            Inequalities { ineqs: vec![i.clone()], rest: MaybeTrivial::NonTrivial(t1.clone()) },
            Inequalities { ineqs: vec![i.clone()], rest: MaybeTrivial::NonTrivial(t2.clone()) },
        );
        assert_eq!(m, Inequalities { ineqs: vec![i.clone(), i], rest: MaybeTrivial::NonTrivial(Tree::conj(t1, t2)) });
    }

    #[test]
    fn fourier_motzkin_pairs_bounds() {
        // a <= X1, a >= X2, a >= 3
        let ineqs = vec![
            Assertion::Ineq { strict: false, lin: lin(&[(0, 1), (1, -1)], 0) },
            Assertion::Ineq { strict: false, lin: lin(&[(0, -1), (2, 1)], 0) },
            Assertion::Ineq { strict: false, lin: lin(&[(0, -1)], 3) },
        ];
        let (t, lower, upper) = fourier_motzkin(0, &ineqs);
        assert_eq!((lower.len(), upper.len()), (2, 1));
        let expected = Tree::conj(le(&[(1, -1), (2, 1)], 0), le(&[(1, -1)], 3));
        assert_eq!(t, MaybeTrivial::NonTrivial(expected));
        let one_sided = vec![Assertion::Ineq { strict: false, lin: lin(&[(0, -1)], 1) }];
        assert_eq!(fourier_motzkin(0, &one_sided).0, MaybeTrivial::Trivial(true));
        let contradiction = vec![
            Assertion::Ineq { strict: true, lin: lin(&[(0, 1)], 0) },
            Assertion::Ineq { strict: true, lin: lin(&[(0, -1)], 0) },
        ];
        assert_eq!(fourier_motzkin(0, &contradiction).0, MaybeTrivial::Trivial(false));
    }

    #[test]
    fn substitution_removes_the_variable() {
        let mut ctx = Ctx::default();
        // a = X1 - 2 and a + 1 >= 0
        let q = Tree::conj(eq(&[(0, 1), (1, -1)], 2), le(&[(0, -1)], -1));
        let out = solve_variable(&mut ctx, MaybeTrivial::NonTrivial(vec![SolvedQuery::new(q)]), 0);
        let MaybeTrivial::NonTrivial(qs) = out else { panic!("{out:?}") };
        assert_eq!(qs.len(), 1);
        assert_eq!(qs[0].query, le(&[(1, -1)], 1));
        assert_eq!(qs[0].solutions, vec![Solution::Scalar { var: 0, value: lin(&[(1, 1)], -2) }]);
        assert_eq!(ctx.stats.scalar_substitutions, 1);
    }

    #[test]
    fn unused_variable_leaves_query_alone() {
        let mut ctx = Ctx::default();
        let q = le(&[(1, 1)], 0);
        let out = solve_variable(&mut ctx, MaybeTrivial::NonTrivial(vec![SolvedQuery::new(q.clone())]), 0);
        assert_eq!(
            out,
            MaybeTrivial::NonTrivial(vec![SolvedQuery { query: q, solutions: vec![Solution::Free { var: 0 }] }])
        );
    }

    #[test]
    fn all_false_disjuncts_collapse() {
        let mut ctx = Ctx::default();
        let contradiction = Tree::conj(
            Tree::Atom(Assertion::Ineq { strict: true, lin: lin(&[(0, 1)], 0) }),
            Tree::Atom(Assertion::Ineq { strict: true, lin: lin(&[(0, -1)], 0) }),
        );
        let qs = vec![SolvedQuery::new(contradiction.clone()), SolvedQuery::new(contradiction)];
        assert_eq!(solve_variable(&mut ctx, MaybeTrivial::NonTrivial(qs), 0), MaybeTrivial::Trivial(false));
    }
}
