use std::fmt;

/// Types of the specification language. Vector and index sizes are always
/// concrete naturals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Fun(Box<Type>, Box<Type>),
    /// A bare natural appearing in type position (only meaningful as a size).
    Nat(u64),
    Vector(Box<Type>, u64),
    Index(u64),
    Bool,
    Real,
}

impl Type {
    pub fn fun(domain: Type, codomain: Type) -> Type {
        Type::Fun(Box::new(domain), Box::new(codomain))
    }

    pub fn vector(elem: Type, size: u64) -> Type {
        Type::Vector(Box::new(elem), size)
    }

    pub fn real_vector(size: u64) -> Type {
        Type::vector(Type::Real, size)
    }

    pub fn is_function(&self) -> bool {
        matches!(self, Type::Fun(..))
    }

    /// `Some(n)` when this is `Vector Real n`.
    pub fn real_vector_size(&self) -> Option<u64> {
        match self {
            Type::Vector(elem, n) if **elem == Type::Real => Some(*n),
            _ => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Type::Fun(d, c) => {
                if prec > 0 {
                    write!(f, "(")?;
                }
                d.fmt_prec(f, 1)?;
                write!(f, " -> ")?;
                c.fmt_prec(f, 0)?;
                if prec > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Type::Nat(n) => write!(f, "{n}"),
            Type::Vector(elem, n) => {
                if prec > 1 {
                    write!(f, "(")?;
                }
                write!(f, "Vector ")?;
                elem.fmt_prec(f, 2)?;
                write!(f, " {n}")?;
                if prec > 1 {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Type::Index(n) => {
                if prec > 1 {
                    write!(f, "(Index {n})")
                } else {
                    write!(f, "Index {n}")
                }
            }
            Type::Bool => write!(f, "Bool"),
            Type::Real => write!(f, "Real"),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Input/output dimensions of a declared network.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NetworkSignature {
    pub name: String,
    pub inputs: usize,
    pub outputs: usize,
}

impl NetworkSignature {
    /// Extracts the signature from a `Vector Real m -> Vector Real n` type.
    pub fn from_type(name: &str, ty: &Type) -> Option<NetworkSignature> {
        match ty {
            Type::Fun(d, c) => {
                let m = d.real_vector_size()?;
                let n = c.real_vector_size()?;
                if m == 0 || n == 0 {
                    return None;
                }
                Some(NetworkSignature { name: name.to_string(), inputs: m as usize, outputs: n as usize })
            }
            _ => None,
        }
    }
}
