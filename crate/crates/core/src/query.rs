//! Target representation: sparse linear expressions, assertions over them,
//! boolean trees of assertions and the bookkeeping for trivial results.

use std::collections::BTreeMap;
use std::fmt::{self, Debug};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::normalizer::{Level, Value};
use crate::rational::{format_rational, Rational};

pub type Var = Level;

/// Constants a linear expression can carry: a scalar or a vector.
pub trait Constant: Clone + PartialEq + Debug {
    fn plus(&self, other: &Self) -> Self;
    fn scale(&self, k: &Rational) -> Self;
    fn is_zero(&self) -> bool;
}

impl Constant for Rational {
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, k: &Rational) -> Self {
        self * k
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Constant for Vec<Rational> {
    fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "vector constants of different sizes");
        self.iter().zip(other).map(|(a, b)| a + b).collect()
    }
    fn scale(&self, k: &Rational) -> Self {
        self.iter().map(|a| a * k).collect()
    }
    fn is_zero(&self) -> bool {
        self.iter().all(Zero::is_zero)
    }
}

/// `Σ coeffs[v] * v + constant`, with no zero coefficient stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearExpr<C> {
    pub coeffs: BTreeMap<Var, Rational>,
    pub constant: C,
}

pub type ScalarLinear = LinearExpr<Rational>;
pub type VectorLinear = LinearExpr<Vec<Rational>>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no value for variable {0}")]
pub struct MissingVariable(pub Var);

impl<C: Constant> LinearExpr<C> {
    pub fn constant(c: C) -> Self {
        LinearExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: Var, zero: C) -> Self {
        LinearExpr { coeffs: BTreeMap::from([(v, Rational::one())]), constant: zero }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, v: Var) -> Option<&Rational> {
        self.coeffs.get(&v)
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.coeffs.contains_key(&v)
    }

    pub fn add_term(&mut self, v: Var, k: &Rational) {
        let entry = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *entry += k;
        if Zero::is_zero(entry) {
            self.coeffs.remove(&v);
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, k) in &other.coeffs {
            out.add_term(*v, k);
        }
        out.constant = out.constant.plus(&other.constant);
        out
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if Zero::is_zero(k) {
            return LinearExpr::constant(self.constant.scale(k));
        }
        LinearExpr { coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(), constant: self.constant.scale(k) }
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scale(&-Rational::one()))
    }

    /// Replaces `v` by `value`. Returns the number of coefficients visited.
    pub fn substitute(&mut self, v: Var, value: &Self) -> usize {
        let visits = self.coeffs.len();
        if let Some(k) = self.coeffs.remove(&v) {
            *self = self.plus(&value.scale(&k));
        }
        visits
    }

    /// `Σ coeff · value + constant`, exactly.
    pub fn evaluate(&self, value: &dyn Fn(Var) -> Option<C>) -> Result<C, MissingVariable> {
        let mut acc = self.constant.clone();
        for (v, k) in &self.coeffs {
            acc = acc.plus(&value(*v).ok_or(MissingVariable(*v))?.scale(k));
        }
        Ok(acc)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.coeffs.keys().copied()
    }
}

impl ScalarLinear {
    pub fn zero() -> ScalarLinear {
        LinearExpr::constant(Rational::zero())
    }
    pub fn scalar_var(v: Var) -> ScalarLinear {
        LinearExpr::var(v, Rational::zero())
    }
}

impl VectorLinear {
    pub fn size(&self) -> usize {
        self.constant.len()
    }

    /// The `i`-th component, with every vector variable mapped to its `i`-th
    /// element variable.
    pub fn project(&self, i: usize, element: &dyn Fn(Var, usize) -> Var) -> ScalarLinear {
        let mut out = ScalarLinear::constant(self.constant[i].clone());
        for (v, k) in &self.coeffs {
            out.add_term(element(*v, i), k);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assertion {
    /// `lin == 0`
    Eq(ScalarLinear),
    /// `lin < 0` when strict, `lin <= 0` otherwise.
    Ineq { strict: bool, lin: ScalarLinear },
    /// `lin == 0` componentwise.
    VecEq(VectorLinear),
}

/// Relation used when rendering an assertion with its constant on the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "==",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds(self, x: &Rational, y: &Rational) -> bool {
        match self {
            Rel::Eq => x == y,
            Rel::Le => x <= y,
            Rel::Lt => x < y,
            Rel::Ge => x >= y,
            Rel::Gt => x > y,
        }
    }
}

impl Assertion {
    /// `lhs rel rhs` normalized to the stored form.
    pub fn relation(lhs: &ScalarLinear, rel: Rel, rhs: &ScalarLinear) -> Assertion {
        match rel {
            Rel::Eq => Assertion::Eq(lhs.minus(rhs)),
            Rel::Le => Assertion::Ineq { strict: false, lin: lhs.minus(rhs) },
            Rel::Lt => Assertion::Ineq { strict: true, lin: lhs.minus(rhs) },
            Rel::Ge => Assertion::Ineq { strict: false, lin: rhs.minus(lhs) },
            Rel::Gt => Assertion::Ineq { strict: true, lin: rhs.minus(lhs) },
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Assertion::Eq(l) | Assertion::Ineq { lin: l, .. } => l.mentions(v),
            Assertion::VecEq(l) => l.mentions(v),
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        match self {
            Assertion::Eq(l) | Assertion::Ineq { lin: l, .. } => l.vars().collect(),
            Assertion::VecEq(l) => l.vars().collect(),
        }
    }

    /// Truth value of a variable-free assertion.
    pub fn decide_constant(&self) -> Option<bool> {
        match self {
            Assertion::Eq(l) if l.is_constant() => Some(Zero::is_zero(&l.constant)),
            Assertion::Ineq { strict, lin } if lin.is_constant() => {
                Some(if *strict { lin.constant.is_negative() } else { !lin.constant.is_positive() })
            }
            Assertion::VecEq(l) if l.is_constant() => Some(Constant::is_zero(&l.constant)),
            _ => None,
        }
    }

    /// Scalar form `Σ k·v rel c` with the leading coefficient positive.
    pub fn oriented(&self) -> Option<(BTreeMap<Var, Rational>, Rel, Rational)> {
        let (lin, rel) = match self {
            Assertion::Eq(l) => (l, Rel::Eq),
            Assertion::Ineq { strict, lin } => (lin, if *strict { Rel::Lt } else { Rel::Le }),
            Assertion::VecEq(_) => return None,
        };
        let flip = lin.coeffs.values().next().is_some_and(|k| k.is_negative());
        if flip {
            let rel = match rel {
                Rel::Le => Rel::Ge,
                Rel::Lt => Rel::Gt,
                r => r,
            };
            Some((lin.coeffs.iter().map(|(v, k)| (*v, -k)).collect(), rel, lin.constant.clone()))
        } else {
            Some((lin.coeffs.clone(), rel, -lin.constant.clone()))
        }
    }

    pub fn render(&self, names: &dyn Fn(Var) -> String) -> String {
        match self.oriented() {
            Some((coeffs, rel, rhs)) => {
                format!("{} {} {}", render_terms(&coeffs, names), rel.symbol(), format_rational(&rhs))
            }
            None => {
                let Assertion::VecEq(l) = self else { unreachable!() };
                let consts: Vec<String> = l.constant.iter().map(|c| format_rational(&-c)).collect();
                format!("{} .==. [{}]", render_terms(&l.coeffs, names), consts.join(", "))
            }
        }
    }
}

/// `2.0*X0 + -1.0*X1`; unit coefficients are omitted and an empty sum is `0.0`.
pub fn render_terms(coeffs: &BTreeMap<Var, Rational>, names: &dyn Fn(Var) -> String) -> String {
    if coeffs.is_empty() {
        return format_rational(&Rational::zero());
    }
    let terms: Vec<String> = coeffs
        .iter()
        .map(|(v, k)| if k.is_one() { names(*v) } else { format!("{}*{}", format_rational(k), names(*v)) })
        .collect();
    terms.join(" + ")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree<A> {
    Atom(A),
    Conj(Box<Tree<A>>, Box<Tree<A>>),
    Disj(Box<Tree<A>>, Box<Tree<A>>),
}

impl<A> Tree<A> {
    pub fn conj(x: Tree<A>, y: Tree<A>) -> Tree<A> {
        Tree::Conj(Box::new(x), Box::new(y))
    }

    pub fn disj(x: Tree<A>, y: Tree<A>) -> Tree<A> {
        Tree::Disj(Box::new(x), Box::new(y))
    }

    pub fn atoms(&self) -> Vec<&A> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |a| out.push(a));
        out
    }

    pub fn for_each_atom<'a>(&'a self, f: &mut dyn FnMut(&'a A)) {
        match self {
            Tree::Atom(a) => f(a),
            Tree::Conj(x, y) | Tree::Disj(x, y) => {
                x.for_each_atom(f);
                y.for_each_atom(f);
            }
        }
    }

    pub fn for_each_atom_mut(&mut self, f: &mut dyn FnMut(&mut A)) {
        match self {
            Tree::Atom(a) => f(a),
            Tree::Conj(x, y) | Tree::Disj(x, y) => {
                x.for_each_atom_mut(f);
                y.for_each_atom_mut(f);
            }
        }
    }

    pub fn map<B>(self, f: &mut dyn FnMut(A) -> B) -> Tree<B> {
        match self {
            Tree::Atom(a) => Tree::Atom(f(a)),
            Tree::Conj(x, y) => Tree::conj(x.map(f), y.map(f)),
            Tree::Disj(x, y) => Tree::disj(x.map(f), y.map(f)),
        }
    }

    /// Rebuilds the tree from per-atom results, simplifying trivial leaves.
    pub fn map_trivial(self, f: &mut dyn FnMut(A) -> MaybeTrivial<Tree<A>>) -> MaybeTrivial<Tree<A>> {
        match self {
            Tree::Atom(a) => f(a),
            Tree::Conj(x, y) => {
                let x = x.map_trivial(f);
                and_trivial(Tree::conj, x, y.map_trivial(f))
            }
            Tree::Disj(x, y) => {
                let x = x.map_trivial(f);
                or_trivial(Tree::disj, x, y.map_trivial(f))
            }
        }
    }

    /// Evaluates the tree given a truth value for each atom.
    pub fn evaluate(&self, atom: &mut dyn FnMut(&A) -> bool) -> bool {
        match self {
            Tree::Atom(a) => atom(a),
            Tree::Conj(x, y) => x.evaluate(atom) && y.evaluate(atom),
            Tree::Disj(x, y) => x.evaluate(atom) || y.evaluate(atom),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Tree::Atom(_) => 1,
            Tree::Conj(x, y) | Tree::Disj(x, y) => 1 + x.size() + y.size(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MaybeTrivial<A> {
    Trivial(bool),
    NonTrivial(A),
}

impl<A> MaybeTrivial<A> {
    pub fn map<B>(self, f: impl FnOnce(A) -> B) -> MaybeTrivial<B> {
        match self {
            MaybeTrivial::Trivial(b) => MaybeTrivial::Trivial(b),
            MaybeTrivial::NonTrivial(a) => MaybeTrivial::NonTrivial(f(a)),
        }
    }

    pub fn as_non_trivial(&self) -> Option<&A> {
        match self {
            MaybeTrivial::NonTrivial(a) => Some(a),
            MaybeTrivial::Trivial(_) => None,
        }
    }
}

/// False absorbs, true is the identity.
pub fn and_trivial<A>(combine: impl FnOnce(A, A) -> A, x: MaybeTrivial<A>, y: MaybeTrivial<A>) -> MaybeTrivial<A> {
    use MaybeTrivial::*;
    match (x, y) {
        (Trivial(false), _) | (_, Trivial(false)) => Trivial(false),
        (Trivial(true), y) => y,
        (x, Trivial(true)) => x,
        (NonTrivial(a), NonTrivial(b)) => NonTrivial(combine(a, b)),
    }
}

/// True absorbs, false is the identity.
pub fn or_trivial<A>(combine: impl FnOnce(A, A) -> A, x: MaybeTrivial<A>, y: MaybeTrivial<A>) -> MaybeTrivial<A> {
    use MaybeTrivial::*;
    match (x, y) {
        (Trivial(true), _) | (_, Trivial(true)) => Trivial(true),
        (Trivial(false), y) => y,
        (x, Trivial(false)) => x,
        (NonTrivial(a), NonTrivial(b)) => NonTrivial(combine(a, b)),
    }
}

pub type Query = Tree<Assertion>;

/// A bound `var >= value` (lower) or `var <= value` (upper), strict or not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub strict: bool,
    pub value: ScalarLinear,
}

/// How an eliminated user variable is recovered from the remaining ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Scalar { var: Var, value: ScalarLinear },
    Vector { var: Var, value: VectorLinear },
    Bounds { var: Var, lower: Vec<Bound>, upper: Vec<Bound> },
    Free { var: Var },
}

impl Solution {
    pub fn var(&self) -> Var {
        match self {
            Solution::Scalar { var, .. }
            | Solution::Vector { var, .. }
            | Solution::Bounds { var, .. }
            | Solution::Free { var } => *var,
        }
    }
}

/// One disjunct of a query set with the solutions of the user variables it
/// eliminated, in elimination order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedQuery {
    pub query: Query,
    pub solutions: Vec<Solution>,
}

impl SolvedQuery {
    pub fn new(query: Query) -> SolvedQuery {
        SolvedQuery { query, solutions: Vec::new() }
    }
}

/// Nonempty disjunction of queries.
pub type QuerySet = Vec<SolvedQuery>;

/// Conjoins two query sets pairwise, concatenating solutions.
pub fn cartesian_conj(xs: QuerySet, ys: QuerySet) -> QuerySet {
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for x in &xs {
        for y in &ys {
            let mut solutions = x.solutions.clone();
            solutions.extend(y.solutions.iter().cloned());
            out.push(SolvedQuery { query: Tree::conj(x.query.clone(), y.query.clone()), solutions });
        }
    }
    out
}

/// A property-level leaf: a query set, negated when it came from `forall`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub negated: bool,
    pub queries: QuerySet,
}

pub type Property = MaybeTrivial<Tree<Leaf>>;

/// Problem-space and embedding-space values keyed by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    pub scalars: BTreeMap<Var, Rational>,
    pub vectors: BTreeMap<Var, Vec<Rational>>,
}

impl Assignment {
    /// Scalar value, falling back to the owning vector's component.
    pub fn scalar(&self, v: Var, parent: &dyn Fn(Var) -> Option<(Var, usize)>) -> Option<Rational> {
        self.scalars
            .get(&v)
            .cloned()
            .or_else(|| parent(v).and_then(|(p, i)| self.vectors.get(&p).map(|xs| xs[i].clone())))
    }

    /// Vector value, falling back to assembling its element values.
    pub fn vector(&self, v: Var, elements: &dyn Fn(Var) -> Option<Vec<Var>>) -> Option<Vec<Rational>> {
        if let Some(xs) = self.vectors.get(&v) {
            return Some(xs.clone());
        }
        elements(v)?.into_iter().map(|e| self.scalars.get(&e).cloned()).collect()
    }
}

/// A value inside the bounds `lower` and `upper` of a feasible interval:
/// the midpoint, one past a single bound, or zero when unbounded.
pub fn choose_value(lower: Option<&Rational>, upper: Option<&Rational>) -> Rational {
    match (lower, upper) {
        (Some(l), Some(u)) if l == u => l.clone(),
        (Some(l), Some(u)) => (l + u) / Rational::from_integer(2.into()),
        (Some(l), None) => l + Rational::one(),
        (None, Some(u)) => u - Rational::one(),
        (None, None) => Rational::zero(),
    }
}

/// Recovers the eliminated variables from an assignment to the survivors by
/// replaying `solutions` in reverse.
pub fn reconstruct(
    solutions: &[Solution],
    assignment: &mut Assignment,
    parent: &dyn Fn(Var) -> Option<(Var, usize)>,
    elements: &dyn Fn(Var) -> Option<Vec<Var>>,
) -> Result<(), MissingVariable> {
    for s in solutions.iter().rev() {
        let scalar_env = |a: &Assignment| {
            let a = a.clone();
            move |v: Var| a.scalar(v, parent)
        };
        match s {
            Solution::Scalar { var, value } => {
                let x = value.evaluate(&scalar_env(assignment))?;
                assignment.scalars.insert(*var, x);
            }
            Solution::Vector { var, value } => {
                let a = assignment.clone();
                let x = value.evaluate(&|v| a.vector(v, elements))?;
                if let Some(elems) = elements(*var) {
                    for (e, q) in elems.iter().zip(&x) {
                        assignment.scalars.insert(*e, q.clone());
                    }
                }
                assignment.vectors.insert(*var, x);
            }
            Solution::Bounds { var, lower, upper } => {
                let env = scalar_env(assignment);
                let eval_all = |bs: &[Bound]| -> Result<Vec<(bool, Rational)>, MissingVariable> {
                    bs.iter().map(|b| Ok((b.strict, b.value.evaluate(&env)?))).collect()
                };
                let lows = eval_all(lower)?;
                let highs = eval_all(upper)?;
                let x = choose_value(lows.iter().map(|(_, q)| q).max(), highs.iter().map(|(_, q)| q).min());
                assignment.scalars.insert(*var, x);
            }
            Solution::Free { var } => {
                if elements(*var).is_none() {
                    assignment.scalars.entry(*var).or_insert_with(Rational::zero);
                }
            }
        }
    }
    Ok(())
}

/// Linearization failures.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LinearityError {
    #[error("non-linear product `{0}`")]
    NonLinear(String),
    #[error("`{0}` is not a linear expression")]
    Unexpected(String),
}

/// Flattens a scalar value built from literals, variables, `+` and `*` into
/// a linear expression.
pub fn to_linear(v: &Value, names: &dyn Fn(Level) -> String) -> Result<ScalarLinear, LinearityError> {
    match v {
        Value::Real(q) => Ok(ScalarLinear::constant(q.clone())),
        Value::Var(l, spine) if spine.is_empty() => Ok(ScalarLinear::scalar_var(*l)),
        Value::Add(x, y) => Ok(to_linear(x, names)?.plus(&to_linear(y, names)?)),
        Value::Mul(x, y) => {
            let a = to_linear(x, names)?;
            let b = to_linear(y, names)?;
            if a.is_constant() {
                Ok(b.scale(&a.constant))
            } else if b.is_constant() {
                Ok(a.scale(&b.constant))
            } else {
                Err(LinearityError::NonLinear(v.show(names).to_string()))
            }
        }
        _ => Err(LinearityError::Unexpected(v.show(names).to_string())),
    }
}

/// Flattens a vector value of size `n` built from vector variables, literal
/// constant vectors and `.+.`. Returns `None` when some literal element is
/// not constant, in which case the caller lowers elementwise.
pub fn to_vector_linear(n: usize, v: &Value) -> Option<VectorLinear> {
    let zero = || vec![Rational::zero(); n];
    match v {
        Value::Var(l, spine) if spine.is_empty() => Some(VectorLinear::var(*l, zero())),
        Value::VecLit(xs) if xs.len() == n => {
            let c: Option<Vec<Rational>> = xs.iter().map(|x| x.as_real().cloned()).collect();
            c.map(VectorLinear::constant)
        }
        Value::VectorAdd(x, y) => Some(to_vector_linear(n, x)?.plus(&to_vector_linear(n, y)?)),
        _ => None,
    }
}

/// Component `i` of a vector value as a scalar value.
pub fn project(v: &Value, i: usize, elements: &dyn Fn(Level) -> Option<Vec<Level>>) -> Option<Value> {
    match v {
        Value::VecLit(xs) => xs.get(i).cloned(),
        Value::Var(l, spine) if spine.is_empty() => elements(*l).map(|e| Value::var(e[i])),
        Value::VectorAdd(x, y) => Some(Value::add(project(x, i, elements)?, project(y, i, elements)?)),
        _ => None,
    }
}

/// Debug rendering of a query tree in the infix form of the emitted files.
pub fn render_tree(t: &Query, names: &dyn Fn(Var) -> String) -> String {
    fn go(t: &Query, names: &dyn Fn(Var) -> String, out: &mut String) {
        let op = match t {
            Tree::Atom(a) => {
                out.push('(');
                out.push_str(&a.render(names));
                out.push(')');
                return;
            }
            Tree::Conj(..) => " and ",
            Tree::Disj(..) => " or ",
        };
        let mut parts = Vec::new();
        chain(t, &mut parts);
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                out.push_str(op);
            }
            let nested = !matches!(p, Tree::Atom(_));
            if nested {
                out.push('(');
            }
            go(p, names, out);
            if nested {
                out.push(')');
            }
        }
    }
    fn chain<'a>(t: &'a Query, parts: &mut Vec<&'a Query>) {
        match t {
            Tree::Conj(x, y) => {
                for c in [x, y] {
                    if matches!(**c, Tree::Conj(..)) {
                        chain(c, parts)
                    } else {
                        parts.push(c)
                    }
                }
            }
            Tree::Disj(x, y) => {
                for c in [x, y] {
                    if matches!(**c, Tree::Disj(..)) {
                        chain(c, parts)
                    } else {
                        parts.push(c)
                    }
                }
            }
            Tree::Atom(_) => parts.push(t),
        }
    }
    let mut out = String::new();
    go(t, names, &mut out);
    out
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|v| format!("v{v}")))
    }
}
