use std::fmt;
use std::sync::Arc;

use crate::frontend::{Binder, Expr, OrderOp};
use crate::rational::{format_rational_plain, Rational};

/// De Bruijn level: position counted from the bottom of the context.
pub type Level = usize;

/// Values bound to the variables in scope, bottom of the stack first.
pub type Env = Vec<Value>;

/// An unevaluated binder body together with the environment it closes over.
#[derive(Clone, Debug, PartialEq)]
pub struct Closure {
    pub env: Env,
    pub body: Arc<Expr>,
}

/// Weak-head normal forms.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Lam(Binder, Closure),
    Var(Level, Vec<Value>),
    Real(Rational),
    Add(Box<Value>, Box<Value>),
    Mul(Box<Value>, Box<Value>),
    Bool(bool),
    Not(Box<Value>),
    And(Box<Value>, Box<Value>),
    Or(Box<Value>, Box<Value>),
    Equal(Box<Value>, Box<Value>),
    NotEqual(Box<Value>, Box<Value>),
    Order(OrderOp, Box<Value>, Box<Value>),
    If(Box<Value>, Box<Value>, Box<Value>),
    Forall(Binder, Closure),
    Exists(Binder, Closure),
    Index(u64),
    VecLit(Vec<Value>),
    At(Box<Value>, Box<Value>),
    VectorEqual(u64, Box<Value>, Box<Value>),
    VectorNotEqual(u64, Box<Value>, Box<Value>),
    VectorAdd(Box<Value>, Box<Value>),
    Map(Box<Value>, Box<Value>),
    Fold(Box<Value>, Box<Value>, Box<Value>),
    NetworkApp(String, Box<Value>),
}

fn b(v: Value) -> Box<Value> {
    Box::new(v)
}

#[allow(clippy::should_implement_trait)]
impl Value {
    pub fn var(level: Level) -> Value {
        Value::Var(level, Vec::new())
    }
    pub fn and(x: Value, y: Value) -> Value {
        Value::And(b(x), b(y))
    }
    pub fn or(x: Value, y: Value) -> Value {
        Value::Or(b(x), b(y))
    }
    pub fn not(x: Value) -> Value {
        Value::Not(b(x))
    }
    pub fn order(op: OrderOp, x: Value, y: Value) -> Value {
        Value::Order(op, b(x), b(y))
    }
    pub fn equal(x: Value, y: Value) -> Value {
        Value::Equal(b(x), b(y))
    }
    pub fn not_equal(x: Value, y: Value) -> Value {
        Value::NotEqual(b(x), b(y))
    }
    pub fn ite(c: Value, x: Value, y: Value) -> Value {
        Value::If(b(c), b(x), b(y))
    }
    pub fn vector_equal(n: u64, x: Value, y: Value) -> Value {
        Value::VectorEqual(n, b(x), b(y))
    }
    pub fn vector_not_equal(n: u64, x: Value, y: Value) -> Value {
        Value::VectorNotEqual(n, b(x), b(y))
    }
    pub fn vector_add(x: Value, y: Value) -> Value {
        Value::VectorAdd(b(x), b(y))
    }
    pub fn add(x: Value, y: Value) -> Value {
        Value::Add(b(x), b(y))
    }
    pub fn mul(x: Value, y: Value) -> Value {
        Value::Mul(b(x), b(y))
    }
    pub fn at(x: Value, i: Value) -> Value {
        Value::At(b(x), b(i))
    }
    pub fn network(name: impl Into<String>, x: Value) -> Value {
        Value::NetworkApp(name.into(), b(x))
    }

    pub fn as_real(&self) -> Option<&Rational> {
        match self {
            Value::Real(q) => Some(q),
            _ => None,
        }
    }

    /// Calls `f` on every directly contained value (closures are opaque).
    pub fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Value)) {
        match self {
            Value::Lam(..) | Value::Forall(..) | Value::Exists(..) => {}
            Value::Real(_) | Value::Bool(_) | Value::Index(_) => {}
            Value::Var(_, spine) => spine.iter().for_each(f),
            Value::VecLit(xs) => xs.iter().for_each(f),
            Value::Not(x) | Value::NetworkApp(_, x) => f(x),
            Value::Add(x, y)
            | Value::Mul(x, y)
            | Value::And(x, y)
            | Value::Or(x, y)
            | Value::Equal(x, y)
            | Value::NotEqual(x, y)
            | Value::Order(_, x, y)
            | Value::At(x, y)
            | Value::VectorEqual(_, x, y)
            | Value::VectorNotEqual(_, x, y)
            | Value::VectorAdd(x, y)
            | Value::Map(x, y) => {
                f(x);
                f(y)
            }
            Value::If(x, y, z) | Value::Fold(x, y, z) => {
                f(x);
                f(y);
                f(z)
            }
        }
    }

    /// Closures reachable without entering a binder.
    pub fn closures(&self) -> Vec<&Closure> {
        fn go<'a>(v: &'a Value, out: &mut Vec<&'a Closure>) {
            match v {
                Value::Lam(_, c) | Value::Forall(_, c) | Value::Exists(_, c) => out.push(c),
                _ => v.for_each_child(|x| go(x, out)),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn show<'a>(&'a self, names: &'a dyn Fn(Level) -> String) -> Show<'a> {
        Show { value: self, names }
    }
}

/// Human-readable rendering using a naming function for levels.
pub struct Show<'a> {
    value: &'a Value,
    names: &'a dyn Fn(Level) -> String,
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        render(self.value, self.names, f, 0)
    }
}

fn prec(v: &Value) -> u8 {
    match v {
        Value::If(..) | Value::Forall(..) | Value::Exists(..) | Value::Lam(..) => 0,
        Value::Or(..) => 1,
        Value::And(..) => 2,
        Value::Not(..) => 3,
        Value::Equal(..)
        | Value::NotEqual(..)
        | Value::Order(..)
        | Value::VectorEqual(..)
        | Value::VectorNotEqual(..) => 4,
        Value::Add(..) | Value::VectorAdd(..) => 5,
        Value::Mul(..) => 6,
        Value::Real(q) if q < &Rational::from_integer(0.into()) => 7,
        Value::At(..) => 8,
        Value::Var(_, spine) if !spine.is_empty() => 9,
        Value::Map(..) | Value::Fold(..) | Value::NetworkApp(..) => 9,
        _ => 10,
    }
}

fn render(v: &Value, names: &dyn Fn(Level) -> String, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let p = prec(v);
    if p < ctx {
        write!(f, "(")?;
    }
    let bin = |f: &mut fmt::Formatter<'_>, x: &Value, op: &str, y: &Value, l: u8, r: u8| -> fmt::Result {
        render(x, names, f, l)?;
        write!(f, " {op} ")?;
        render(y, names, f, r)
    };
    match v {
        Value::Var(l, spine) => {
            write!(f, "{}", names(*l))?;
            for a in spine {
                write!(f, " ")?;
                render(a, names, f, 10)?;
            }
        }
        Value::Real(q) => write!(f, "{}", format_rational_plain(q))?,
        Value::Bool(x) => write!(f, "{x}")?,
        Value::Index(i) => write!(f, "{i}")?,
        Value::Lam(binder, _) => write!(f, "\\{} -> ...", binder.name)?,
        Value::Forall(binder, _) => write!(f, "forall ({} : {}) . ...", binder.name, binder.ty)?,
        Value::Exists(binder, _) => write!(f, "exists ({} : {}) . ...", binder.name, binder.ty)?,
        Value::Add(x, y) => bin(f, x, "+", y, 5, 6)?,
        Value::VectorAdd(x, y) => bin(f, x, ".+.", y, 5, 6)?,
        Value::Mul(x, y) => bin(f, x, "*", y, 6, 7)?,
        Value::And(x, y) => bin(f, x, "and", y, 3, 2)?,
        Value::Or(x, y) => bin(f, x, "or", y, 2, 1)?,
        Value::Equal(x, y) => bin(f, x, "==", y, 5, 5)?,
        Value::NotEqual(x, y) => bin(f, x, "!=", y, 5, 5)?,
        Value::VectorEqual(_, x, y) => bin(f, x, ".==.", y, 5, 5)?,
        Value::VectorNotEqual(_, x, y) => bin(f, x, ".!=.", y, 5, 5)?,
        Value::Order(op, x, y) => bin(f, x, op.symbol(), y, 5, 5)?,
        Value::At(x, y) => bin(f, x, "!", y, 8, 9)?,
        Value::Not(x) => {
            write!(f, "not ")?;
            render(x, names, f, 3)?;
        }
        Value::If(c, x, y) => {
            write!(f, "if ")?;
            render(c, names, f, 0)?;
            write!(f, " then ")?;
            render(x, names, f, 0)?;
            write!(f, " else ")?;
            render(y, names, f, 0)?;
        }
        Value::VecLit(xs) => {
            write!(f, "[")?;
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                render(x, names, f, 0)?;
            }
            write!(f, "]")?;
        }
        Value::Map(g, xs) => {
            write!(f, "map ")?;
            render(g, names, f, 10)?;
            write!(f, " ")?;
            render(xs, names, f, 10)?;
        }
        Value::Fold(g, e, xs) => {
            write!(f, "fold ")?;
            render(g, names, f, 10)?;
            write!(f, " ")?;
            render(e, names, f, 10)?;
            write!(f, " ")?;
            render(xs, names, f, 10)?;
        }
        Value::NetworkApp(name, x) => {
            write!(f, "{name} ")?;
            render(x, names, f, 10)?;
        }
    }
    if p < ctx {
        write!(f, ")")?;
    }
    Ok(())
}
