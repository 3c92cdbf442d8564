//! Type checking and elaboration from surface terms to the core language.
//!
//! Runs in two passes over each property. The first pass infers binder types
//! with unification metas; unconstrained binders default to `Real`. The
//! second pass sees only concrete binder types, so overloaded operators
//! (`+`, `==`, `!=`) resolve directly to their scalar or vector builtins.

use std::collections::{BTreeMap, HashMap};

use super::expr::{Binder, Expr, OrderOp};
use super::syntax::{BinOp, BinderGroup, Builtin, Decl, Quantifier, Span, Term, TermKind};
use super::types::{NetworkSignature, Type};
use super::TypeError;
use crate::rational::{int, parse_rational};

/// A checked property ready for compilation.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckedProperty {
    pub name: String,
    pub span: Span,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypedProgram {
    pub networks: Vec<NetworkSignature>,
    pub properties: Vec<CheckedProperty>,
}

impl TypedProgram {
    pub fn network(&self, name: &str) -> Option<&NetworkSignature> {
        self.networks.iter().find(|n| n.name == name)
    }

    pub fn property(&self, name: &str) -> Option<&CheckedProperty> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn network_dims(&self) -> impl Fn(&str) -> Option<(u64, u64)> + '_ {
        move |name| self.network(name).map(|n| (n.inputs as u64, n.outputs as u64))
    }
}

pub fn typecheck(decls: &[Decl]) -> Result<TypedProgram, TypeError> {
    let mut seen: HashMap<&str, Span> = HashMap::new();
    for d in decls {
        if seen.insert(d.name(), d.span()).is_some() {
            return Err(TypeError::DuplicateDeclaration { span: d.span(), name: d.name().to_string() });
        }
    }
    let mut networks = Vec::new();
    for d in decls {
        if let Decl::Network { name, ty, span } = d {
            let sig = NetworkSignature::from_type(name, ty).ok_or_else(|| TypeError::InvalidNetworkType {
                span: *span,
                name: name.clone(),
                ty: ty.to_string(),
            })?;
            networks.push(sig);
        }
    }
    let table: HashMap<String, NetworkSignature> = networks.iter().map(|n| (n.name.clone(), n.clone())).collect();
    let mut properties = Vec::new();
    for d in decls {
        if let Decl::Property { name, body, span } = d {
            let expr = check_property(&table, name, body, *span)?;
            properties.push(CheckedProperty { name: name.clone(), span: *span, expr });
        }
    }
    Ok(TypedProgram { networks, properties })
}

fn check_property(
    networks: &HashMap<String, NetworkSignature>,
    name: &str,
    body: &Term,
    span: Span,
) -> Result<Expr, TypeError> {
    let mut first = Elab::new(networks, None);
    let ty = first.infer(body)?.1;
    let ty = first.zonk(&ty);
    if !matches!(ty, Ty::Bool | Ty::Meta(_)) {
        return Err(TypeError::NonBoolProperty { span, name: name.to_string(), ty: first.show(&ty) });
    }
    // Unconstrained binders are real-valued.
    for i in 0..first.binders.len() {
        let t = first.zonk(&first.binders[i].ty.clone());
        default_metas(&mut first, &t);
    }
    let mut resolved = Vec::with_capacity(first.binders.len());
    for b in first.binders.clone() {
        let t = first.zonk(&b.ty);
        let Some(ty) = t.to_type() else {
            return Err(TypeError::CannotInfer { span: b.span, name: b.name.clone() });
        };
        if b.quantified {
            if ty.is_function() {
                return Err(TypeError::QuantifiedFunction { span: b.span, name: b.name.clone(), ty: ty.to_string() });
            }
            let ok = match &ty {
                Type::Real | Type::Bool | Type::Index(_) => true,
                Type::Vector(e, n) => **e == Type::Real && *n >= 1,
                _ => false,
            };
            if !ok {
                return Err(TypeError::UnsupportedQuantifierDomain { span: b.span, ty: ty.to_string() });
            }
        }
        resolved.push(ty);
    }
    let mut second = Elab::new(networks, Some(resolved));
    let (expr, ty) = second.infer(body)?;
    if second.zonk(&ty) != Ty::Bool {
        return Err(TypeError::NonBoolProperty { span, name: name.to_string(), ty: second.show(&ty) });
    }
    Ok(expr)
}

fn default_metas(el: &mut Elab<'_>, t: &Ty) {
    match t {
        Ty::Meta(m) => el.metas[*m] = Some(Ty::Real),
        Ty::Fun(a, b) => {
            default_metas(el, a);
            let b = el.zonk(b);
            default_metas(el, &b);
        }
        Ty::Vector(a, _) => default_metas(el, a),
        _ => {}
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Ty {
    Meta(usize),
    Fun(Box<Ty>, Box<Ty>),
    Vector(Box<Ty>, u64),
    Index(u64),
    Bool,
    Real,
}

impl Ty {
    fn from_type(t: &Type) -> Option<Ty> {
        Some(match t {
            Type::Fun(a, b) => Ty::Fun(Box::new(Ty::from_type(a)?), Box::new(Ty::from_type(b)?)),
            Type::Nat(_) => return None,
            Type::Vector(a, n) => Ty::Vector(Box::new(Ty::from_type(a)?), *n),
            Type::Index(n) => Ty::Index(*n),
            Type::Bool => Ty::Bool,
            Type::Real => Ty::Real,
        })
    }

    fn to_type(&self) -> Option<Type> {
        Some(match self {
            Ty::Meta(_) => return None,
            Ty::Fun(a, b) => Type::fun(a.to_type()?, b.to_type()?),
            Ty::Vector(a, n) => Type::vector(a.to_type()?, *n),
            Ty::Index(n) => Type::Index(*n),
            Ty::Bool => Type::Bool,
            Ty::Real => Type::Real,
        })
    }

    fn fun(a: Ty, b: Ty) -> Ty {
        Ty::Fun(Box::new(a), Box::new(b))
    }

    fn real_vector(n: u64) -> Ty {
        Ty::Vector(Box::new(Ty::Real), n)
    }
}

#[derive(Clone, Debug)]
struct BinderInfo {
    name: String,
    span: Span,
    ty: Ty,
    quantified: bool,
}

struct Elab<'a> {
    networks: &'a HashMap<String, NetworkSignature>,
    metas: Vec<Option<Ty>>,
    scope: Vec<(String, Ty)>,
    /// Pass one: every binder in traversal order.
    binders: Vec<BinderInfo>,
    /// Pass two: concrete binder types in the same order.
    resolved: Option<Vec<Type>>,
    next_binder: usize,
}

type Res<T> = Result<T, TypeError>;

impl<'a> Elab<'a> {
    fn new(networks: &'a HashMap<String, NetworkSignature>, resolved: Option<Vec<Type>>) -> Self {
        Elab { networks, metas: Vec::new(), scope: Vec::new(), binders: Vec::new(), resolved, next_binder: 0 }
    }

    fn first_pass(&self) -> bool {
        self.resolved.is_none()
    }

    fn fresh(&mut self) -> Ty {
        self.metas.push(None);
        Ty::Meta(self.metas.len() - 1)
    }

    fn resolve(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Meta(m) = t {
            match &self.metas[m] {
                Some(s) => t = s.clone(),
                None => break,
            }
        }
        t
    }

    fn zonk(&self, t: &Ty) -> Ty {
        match self.resolve(t) {
            Ty::Fun(a, b) => Ty::fun(self.zonk(&a), self.zonk(&b)),
            Ty::Vector(a, n) => Ty::Vector(Box::new(self.zonk(&a)), n),
            t => t,
        }
    }

    fn show(&self, t: &Ty) -> String {
        fn go(t: &Ty, nested: bool) -> String {
            let s = match t {
                Ty::Meta(_) => return "?".into(),
                Ty::Fun(a, b) => format!("{} -> {}", go(a, true), go(b, false)),
                Ty::Vector(a, n) => format!("Vector {} {n}", go(a, true)),
                Ty::Index(n) => format!("Index {n}"),
                Ty::Bool => return "Bool".into(),
                Ty::Real => return "Real".into(),
            };
            if nested {
                format!("({s})")
            } else {
                s
            }
        }
        go(&self.zonk(t), false)
    }

    fn occurs(&self, m: usize, t: &Ty) -> bool {
        match self.resolve(t) {
            Ty::Meta(k) => k == m,
            Ty::Fun(a, b) => self.occurs(m, &a) || self.occurs(m, &b),
            Ty::Vector(a, _) => self.occurs(m, &a),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Ty, b: &Ty) -> bool {
        let (a, b) = (self.resolve(a), self.resolve(b));
        match (&a, &b) {
            (Ty::Meta(x), Ty::Meta(y)) if x == y => true,
            (Ty::Meta(x), t) | (t, Ty::Meta(x)) => {
                if self.occurs(*x, t) {
                    return false;
                }
                self.metas[*x] = Some(t.clone());
                true
            }
            (Ty::Fun(a1, b1), Ty::Fun(a2, b2)) => self.unify(a1, a2) && self.unify(b1, b2),
            (Ty::Vector(a1, n1), Ty::Vector(a2, n2)) => n1 == n2 && self.unify(a1, a2),
            _ => a == b,
        }
    }

    fn expect(&mut self, span: Span, expected: &Ty, found: &Ty) -> Res<()> {
        if self.unify(expected, found) {
            Ok(())
        } else {
            Err(TypeError::Mismatch { span, expected: self.show(expected), found: self.show(found) })
        }
    }

    fn bind(&mut self, name: &str, annot: Option<&Type>, span: Span, quantified: bool) -> Res<Ty> {
        let k = self.next_binder;
        self.next_binder += 1;
        if let Some(resolved) = &self.resolved {
            return Ok(Ty::from_type(&resolved[k]).expect("resolved binder types are concrete"));
        }
        let ty = match annot {
            Some(t) => {
                if quantified && t.is_function() {
                    return Err(TypeError::QuantifiedFunction { span, name: name.to_string(), ty: t.to_string() });
                }
                Ty::from_type(t).ok_or_else(|| TypeError::Mismatch {
                    span,
                    expected: "a type".into(),
                    found: t.to_string(),
                })?
            }
            None => self.fresh(),
        };
        self.binders.push(BinderInfo { name: name.to_string(), span, ty: ty.clone(), quantified });
        Ok(ty)
    }

    fn lookup(&self, name: &str) -> Option<(usize, Ty)> {
        self.scope
            .iter()
            .rev()
            .position(|(n, _)| n == name)
            .map(|i| (i, self.scope[self.scope.len() - 1 - i].1.clone()))
    }

    fn is_numeral(t: &Term) -> bool {
        matches!(t.kind, TermKind::Num(_))
    }

    /// Infers both sides of a homogeneous binary operator, letting a numeral
    /// take its type from the other side.
    fn infer_pair(&mut self, x: &Term, y: &Term) -> Res<(Expr, Expr, Ty)> {
        if Self::is_numeral(x) && !Self::is_numeral(y) {
            let (ey, ty) = self.infer(y)?;
            let ex = self.check(x, &ty)?;
            Ok((ex, ey, ty))
        } else {
            let (ex, tx) = self.infer(x)?;
            let ey = self.check(y, &tx)?;
            Ok((ex, ey, tx))
        }
    }

    fn numeral(&mut self, text: &str, span: Span, expected: &Ty) -> Res<Expr> {
        let q = parse_rational(text).ok_or_else(|| TypeError::Mismatch {
            span,
            expected: "a number".into(),
            found: text.to_string(),
        })?;
        match self.resolve(expected) {
            Ty::Real => Ok(Expr::Real(q)),
            Ty::Index(n) => {
                if !q.is_integer() || q < int(0) {
                    return Err(TypeError::Mismatch { span, expected: format!("Index {n}"), found: text.to_string() });
                }
                let k: u64 = q.to_integer().try_into().unwrap_or(u64::MAX);
                if k >= n {
                    return Err(TypeError::IndexOutOfRange { span, index: k, size: n });
                }
                Ok(Expr::Index(k))
            }
            // only in the first pass; the numeral leaves the meta open
            Ty::Meta(_) => Ok(Expr::Real(q)),
            t => Err(TypeError::Mismatch { span, expected: self.show(&t), found: "a numeric literal".into() }),
        }
    }

    fn check(&mut self, term: &Term, expected: &Ty) -> Res<Expr> {
        let span = term.span;
        match (&term.kind, self.resolve(expected)) {
            (TermKind::Num(text), exp) => self.numeral(text, span, &exp),
            (TermKind::Vec(elems), Ty::Vector(elem, n)) => {
                if elems.len() as u64 != n {
                    return Err(TypeError::Mismatch {
                        span,
                        expected: self.show(expected),
                        found: format!("a vector literal of length {}", elems.len()),
                    });
                }
                let es = elems.iter().map(|e| self.check(e, &elem)).collect::<Res<Vec<_>>>()?;
                Ok(Expr::Vec(es))
            }
            (TermKind::Lam(groups, body), Ty::Fun(..)) => {
                let mut exp = self.resolve(expected);
                let mut binders = Vec::new();
                for g in groups {
                    for name in &g.names {
                        let ty = self.bind(name, g.ty.as_ref(), g.span, false)?;
                        let (dom, cod) = match self.resolve(&exp) {
                            Ty::Fun(d, c) => (*d, *c),
                            Ty::Meta(_) => {
                                let (d, c) = (self.fresh(), self.fresh());
                                self.unify(&exp, &Ty::fun(d.clone(), c.clone()));
                                (d, c)
                            }
                            t => {
                                return Err(TypeError::Mismatch {
                                    span,
                                    expected: self.show(&t),
                                    found: "a function".into(),
                                })
                            }
                        };
                        self.expect(g.span, &dom, &ty)?;
                        self.scope.push((name.clone(), ty.clone()));
                        binders.push((name.clone(), ty));
                        exp = cod;
                    }
                }
                let body = self.check(body, &exp);
                self.scope.truncate(self.scope.len() - binders.len());
                let mut out = body?;
                for (name, ty) in binders.into_iter().rev() {
                    out = Expr::lam(Binder::new(name, self.binder_type(&ty)), out);
                }
                Ok(out)
            }
            (TermKind::If(c, x, y), _) => {
                let c = self.check(c, &Ty::Bool)?;
                let x = self.check(x, expected)?;
                let y = self.check(y, expected)?;
                Ok(Expr::ite(c, x, y))
            }
            _ => {
                let (e, t) = self.infer(term)?;
                self.expect(span, expected, &t)?;
                Ok(e)
            }
        }
    }

    /// Concrete binder type for the elaborated term. During the first pass
    /// metas may remain; the output of that pass is discarded.
    fn binder_type(&self, t: &Ty) -> Type {
        self.zonk(t).to_type().unwrap_or(Type::Real)
    }

    fn infer(&mut self, term: &Term) -> Res<(Expr, Ty)> {
        let span = term.span;
        match &term.kind {
            TermKind::Var(name) => {
                if let Some((ix, ty)) = self.lookup(name) {
                    return Ok((Expr::Var(ix), ty));
                }
                if self.networks.contains_key(name) {
                    return Err(TypeError::UnappliedNetwork { span, name: name.clone() });
                }
                Err(TypeError::Unbound { span, name: name.clone() })
            }
            TermKind::Num(text) => {
                let t = if self.first_pass() { self.fresh() } else { Ty::Real };
                let e = self.numeral(text, span, &t)?;
                Ok((e, t))
            }
            TermKind::Bool(b) => Ok((Expr::Bool(*b), Ty::Bool)),
            TermKind::Vec(elems) => {
                let elem = match elems.first() {
                    Some(e) if !Self::is_numeral(e) || elems.iter().all(Self::is_numeral) => self.infer(e)?.1,
                    Some(_) => {
                        let other = elems.iter().find(|e| !Self::is_numeral(e)).expect("some non-numeral");
                        self.infer(other)?.1
                    }
                    None => self.fresh(),
                };
                let es = elems.iter().map(|e| self.check(e, &elem)).collect::<Res<Vec<_>>>()?;
                let n = es.len() as u64;
                Ok((Expr::Vec(es), Ty::Vector(Box::new(elem), n)))
            }
            TermKind::App(head, args) => {
                if let TermKind::Var(name) = &head.kind {
                    if self.lookup(name).is_none() {
                        if let Some(sig) = self.networks.get(name).cloned() {
                            let arg = self.check(&args[0], &Ty::real_vector(sig.inputs as u64))?;
                            if args.len() > 1 {
                                return Err(TypeError::NotAFunction {
                                    span: args[1].span,
                                    ty: Type::real_vector(sig.outputs as u64).to_string(),
                                });
                            }
                            return Ok((Expr::network(name.clone(), arg), Ty::real_vector(sig.outputs as u64)));
                        }
                    }
                }
                let (mut f, mut tf) = self.infer(head)?;
                for arg in args {
                    let (d, c) = match self.resolve(&tf) {
                        Ty::Fun(d, c) => (*d, *c),
                        Ty::Meta(_) => {
                            let (d, c) = (self.fresh(), self.fresh());
                            self.unify(&tf, &Ty::fun(d.clone(), c.clone()));
                            (d, c)
                        }
                        t => return Err(TypeError::NotAFunction { span: arg.span, ty: self.show(&t) }),
                    };
                    let x = self.check(arg, &d)?;
                    f = Expr::app(f, x);
                    tf = c;
                }
                Ok((f, tf))
            }
            TermKind::Builtin(b, args) => self.infer_builtin(*b, args, span),
            TermKind::Binary(op, x, y) => self.infer_binary(*op, x, y, span),
            TermKind::Neg(x) => {
                let x = self.check(x, &Ty::Real)?;
                Ok((Expr::mul(Expr::Real(int(-1)), x), Ty::Real))
            }
            TermKind::Not(x) => Ok((Expr::not(self.check(x, &Ty::Bool)?), Ty::Bool)),
            TermKind::If(c, x, y) => {
                let c = self.check(c, &Ty::Bool)?;
                let (x, y, t) = self.infer_pair(x, y)?;
                Ok((Expr::ite(c, x, y), t))
            }
            TermKind::Lam(groups, body) => {
                let mut binders = Vec::new();
                for g in groups {
                    for name in &g.names {
                        let ty = self.bind(name, g.ty.as_ref(), g.span, false)?;
                        self.scope.push((name.clone(), ty.clone()));
                        binders.push((name.clone(), ty));
                    }
                }
                let body = self.infer(body);
                self.scope.truncate(self.scope.len() - binders.len());
                let (mut out, mut ty) = body?;
                for (name, bty) in binders.into_iter().rev() {
                    out = Expr::lam(Binder::new(name, self.binder_type(&bty)), out);
                    ty = Ty::fun(bty, ty);
                }
                Ok((out, ty))
            }
            TermKind::Quant(q, groups, body) => self.infer_quant(*q, groups, body),
        }
    }

    fn infer_quant(&mut self, q: Quantifier, groups: &[BinderGroup], body: &Term) -> Res<(Expr, Ty)> {
        let mut binders = Vec::new();
        for g in groups {
            for name in &g.names {
                let ty = self.bind(name, g.ty.as_ref(), g.span, true)?;
                self.scope.push((name.clone(), ty.clone()));
                binders.push((name.clone(), ty));
            }
        }
        let body = self.check(body, &Ty::Bool);
        self.scope.truncate(self.scope.len() - binders.len());
        let mut out = body?;
        for (name, ty) in binders.into_iter().rev() {
            let b = Binder::new(name, self.binder_type(&ty));
            out = match q {
                Quantifier::Forall => Expr::forall(b, out),
                Quantifier::Exists => Expr::exists(b, out),
            };
        }
        Ok((out, Ty::Bool))
    }

    fn vector_of(&mut self, term: &Term) -> Res<(Expr, Ty, u64)> {
        let (e, t) = self.infer(term)?;
        match self.resolve(&t) {
            Ty::Vector(elem, n) => Ok((e, *elem, n)),
            Ty::Meta(_) => Err(TypeError::CannotInfer { span: term.span, name: term.to_string() }),
            t => Err(TypeError::Mismatch { span: term.span, expected: "a vector".into(), found: self.show(&t) }),
        }
    }

    fn infer_builtin(&mut self, b: Builtin, args: &[Term], span: Span) -> Res<(Expr, Ty)> {
        debug_assert_eq!(args.len(), b.arity(), "parser enforces builtin arity at {span}");
        match b {
            Builtin::Map => {
                let (xs, elem, n) = self.vector_of(&args[1])?;
                let res = self.fresh();
                let f = self.check(&args[0], &Ty::fun(elem, res.clone()))?;
                Ok((Expr::map(f, xs), Ty::Vector(Box::new(self.zonk(&res)), n)))
            }
            Builtin::Fold => {
                let (xs, elem, _) = self.vector_of(&args[2])?;
                let (e, acc) = if Self::is_numeral(&args[1]) {
                    let t = if self.first_pass() { self.fresh() } else { Ty::Real };
                    (self.check(&args[1], &t)?, t)
                } else {
                    self.infer(&args[1])?
                };
                let f = self.check(&args[0], &Ty::fun(elem, Ty::fun(acc.clone(), acc.clone())))?;
                Ok((Expr::fold(f, e, xs), acc))
            }
            Builtin::ZipWith => {
                let (xs, e1, n) = self.vector_of(&args[1])?;
                let (ys, e2, m) = self.vector_of(&args[2])?;
                if n != m {
                    return Err(TypeError::Mismatch {
                        span: args[2].span,
                        expected: format!("a vector of length {n}"),
                        found: format!("a vector of length {m}"),
                    });
                }
                let res = self.fresh();
                let f = self.check(&args[0], &Ty::fun(e1, Ty::fun(e2, res.clone())))?;
                Ok((Expr::zip_with(n, f, xs, ys), Ty::Vector(Box::new(self.zonk(&res)), n)))
            }
        }
    }

    fn infer_binary(&mut self, op: BinOp, x: &Term, y: &Term, span: Span) -> Res<(Expr, Ty)> {
        match op {
            BinOp::Or | BinOp::And => {
                let ex = self.check(x, &Ty::Bool)?;
                let ey = self.check(y, &Ty::Bool)?;
                Ok((if op == BinOp::Or { Expr::or(ex, ey) } else { Expr::and(ex, ey) }, Ty::Bool))
            }
            BinOp::Sub => {
                let ex = self.check(x, &Ty::Real)?;
                let ey = self.check(y, &Ty::Real)?;
                Ok((Expr::add(ex, Expr::mul(Expr::Real(int(-1)), ey)), Ty::Real))
            }
            BinOp::Mul => {
                let ex = self.check(x, &Ty::Real)?;
                let ey = self.check(y, &Ty::Real)?;
                Ok((Expr::mul(ex, ey), Ty::Real))
            }
            BinOp::At => {
                let (xs, elem, n) = self.vector_of(x)?;
                let i = self.check(y, &Ty::Index(n))?;
                Ok((Expr::at(xs, i), elem))
            }
            BinOp::Add | BinOp::VecAdd => {
                let (ex, ey, t) = self.infer_pair(x, y)?;
                match self.resolve(&t) {
                    Ty::Real if op == BinOp::Add => Ok((Expr::add(ex, ey), Ty::Real)),
                    Ty::Vector(elem, n) if self.unify(&elem, &Ty::Real) => {
                        Ok((Expr::vec_add(ex, ey), Ty::real_vector(n)))
                    }
                    Ty::Meta(_) if self.first_pass() => Ok((Expr::add(ex, ey), t)),
                    t => Err(TypeError::Mismatch {
                        span,
                        expected: if op == BinOp::Add { "Real or a real vector" } else { "a real vector" }.into(),
                        found: self.show(&t),
                    }),
                }
            }
            BinOp::Eq | BinOp::Neq | BinOp::VecEq => {
                let (ex, ey, t) = self.infer_pair(x, y)?;
                let negate = op == BinOp::Neq;
                match self.resolve(&t) {
                    Ty::Real | Ty::Index(_) if op != BinOp::VecEq => {
                        Ok((if negate { Expr::neq(ex, ey) } else { Expr::eq(ex, ey) }, Ty::Bool))
                    }
                    Ty::Vector(elem, n) if self.unify(&elem, &Ty::Real) => {
                        let e = Expr::vec_eq(n, ex, ey);
                        Ok((if negate { Expr::not(e) } else { e }, Ty::Bool))
                    }
                    Ty::Meta(_) if self.first_pass() => Ok((Expr::eq(ex, ey), Ty::Bool)),
                    t => Err(TypeError::UnsupportedEquality { span, ty: self.show(&t) }),
                }
            }
            BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt => {
                let (ex, ey, t) = self.infer_pair(x, y)?;
                let ord = match op {
                    BinOp::Le => OrderOp::Le,
                    BinOp::Lt => OrderOp::Lt,
                    BinOp::Ge => OrderOp::Ge,
                    _ => OrderOp::Gt,
                };
                match self.resolve(&t) {
                    Ty::Real | Ty::Index(_) => Ok((Expr::order(ord, ex, ey), Ty::Bool)),
                    Ty::Meta(_) if self.first_pass() => Ok((Expr::order(ord, ex, ey), Ty::Bool)),
                    t => Err(TypeError::Mismatch { span, expected: "Real or Index".into(), found: self.show(&t) }),
                }
            }
        }
    }
}

/// Binder types of every quantifier in a checked property, outermost first.
pub fn quantified_binders(e: &Expr) -> Vec<Binder> {
    fn go(e: &Expr, out: &mut Vec<Binder>) {
        if let Expr::Forall(b, _) | Expr::Exists(b, _) = e {
            out.push(b.clone());
        }
        for c in e.children() {
            go(c, out);
        }
    }
    let mut out = Vec::new();
    go(e, &mut out);
    out
}

/// Network names applied in a checked property, with application counts.
pub fn network_uses(e: &Expr) -> BTreeMap<String, usize> {
    fn go(e: &Expr, out: &mut BTreeMap<String, usize>) {
        if let Expr::NetworkApp(name, _) = e {
            *out.entry(name.clone()).or_default() += 1;
        }
        for c in e.children() {
            go(c, out);
        }
    }
    let mut out = BTreeMap::new();
    go(e, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::frontend::expr::type_of;

    const NETS: &str = "@network f : Vector Real 1 -> Vector Real 1\n@network g : Vector Real 2 -> Vector Real 1\n";

    fn check(src: &str) -> Result<TypedProgram, TypeError> {
        typecheck(&parse(&format!("{NETS}{src}")).unwrap())
    }

    fn body(src: &str) -> Expr {
        check(src).unwrap().properties.remove(0).expr
    }

    #[test]
    fn infers_untyped_binders() {
        let e = body("@property p = forall a . f [a * a * a] ! 0 >= 0");
        let Expr::Forall(b, _) = &e else { panic!() };
        assert_eq!(b.ty, Type::Real);
    }

    #[test]
    fn overloaded_operators_follow_types() {
        let e = body("@property p = forall (x y : Vector Real 1) . f x == f y and x == y");
        let Expr::Forall(_, inner) = &e else { panic!() };
        let Expr::Forall(_, b) = &**inner else { panic!() };
        let Expr::And(l, r) = &**b else { panic!("{b}") };
        assert!(matches!(**l, Expr::VecEq(1, ..)));
        assert!(matches!(**r, Expr::VecEq(1, ..)));
        let e = body("@property p = exists (x : Vector Real 2) . x + x != [1, 2]");
        let Expr::Exists(_, b) = &e else { panic!() };
        let Expr::Not(v) = &**b else { panic!("{b}") };
        let Expr::VecEq(2, l, _) = &**v else { panic!() };
        assert!(matches!(**l, Expr::VecAdd(..)));
    }

    #[test]
    fn index_literals_take_size_from_context() {
        let e = body("@property p = forall (i : Index 3) . 0 == i or i == 2");
        let Expr::Forall(_, b) = &e else { panic!() };
        let Expr::Or(l, r) = &**b else { panic!() };
        assert_eq!(**l, Expr::eq(Expr::Index(0), Expr::Var(0)));
        assert_eq!(**r, Expr::eq(Expr::Var(0), Expr::Index(2)));
        let err = check("@property p = exists (x : Vector Real 2) . x ! 2 >= 0").unwrap_err();
        assert!(matches!(err, TypeError::IndexOutOfRange { index: 2, size: 2, .. }), "{err:?}");
    }

    #[test]
    fn rejects_mixing_real_and_bool() {
        let err = check("@property p = forall a . f [a] ! 0 + true >= 0").unwrap_err();
        assert!(matches!(err, TypeError::Mismatch { .. }), "{err:?}");
    }

    #[test]
    fn rejects_quantified_functions_before_checking_the_body() {
        let err = check("@property example3 = forall (h : Real -> Real) . f [h x] ! 0 == 0").unwrap_err();
        assert!(matches!(err, TypeError::QuantifiedFunction { .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_declarations() {
        let err = typecheck(&parse("@network f : Vector Real 0 -> Vector Real 1").unwrap()).unwrap_err();
        assert!(matches!(err, TypeError::InvalidNetworkType { .. }));
        let err = check("@property f = true").unwrap_err();
        assert!(matches!(err, TypeError::DuplicateDeclaration { .. }));
        let err = check("@property p = f [1] ! 0").unwrap_err();
        assert!(matches!(err, TypeError::NonBoolProperty { .. }), "{err:?}");
        let err = check("@property p = forall (b : Bool) . b == true").unwrap_err();
        assert!(matches!(err, TypeError::UnsupportedEquality { .. }), "{err:?}");
        let err = check("@property p = forall a . h a").unwrap_err();
        assert!(matches!(err, TypeError::Unbound { .. }), "{err:?}");
    }

    #[test]
    fn elaborated_terms_pass_the_scope_audit() {
        let srcs = [
            "@property p = forall (as : Vector Real 3) . fold (\\a r -> f [a] ! 0 >= 0 and r) true as",
            "@property p = exists (a b : Real) . g [a, b] ! 0 >= 5 or f [a + b] ! 0 >= 0",
            "@property p = forall (x : Vector Real 2) . map (\\z -> z * 2) x == zipWith (\\u v -> u + v) x x",
            "@property p = (\\x -> x + 1) 2 == 3",
        ];
        for src in srcs {
            let prog = check(src).unwrap();
            let dims = prog.network_dims();
            for p in &prog.properties {
                assert_eq!(type_of(&mut vec![], &dims, &p.expr), Ok(Type::Bool), "{src}");
            }
        }
    }
}
