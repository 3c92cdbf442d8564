//! Lexing, parsing and type checking of `.vspec` specifications.

pub mod expr;
pub mod lexer;
pub mod parser;
pub mod syntax;
pub mod typecheck;
pub mod types;

pub use expr::{type_of, Binder, Expr, OrderOp, ScopeError};
pub use parser::{parse, parse_term, parse_type};
pub use syntax::{pretty_program, Decl, Span, Term};
pub use typecheck::{typecheck, CheckedProperty, TypedProgram};
pub use types::{NetworkSignature, Type};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    match expected {
        [] => String::new(),
        [one] => format!(", expected {one}"),
        many => format!(", expected one of {}", many.join(", ")),
    }
}

impl ParseError {
    pub fn new(span: Span, message: String, expected: Vec<String>) -> ParseError {
        ParseError { span, message, expected }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{span}: type mismatch, expected {expected} but found {found}")]
    Mismatch { span: Span, expected: String, found: String },
    #[error("{span}: unbound name `{name}`")]
    Unbound { span: Span, name: String },
    #[error("{span}: network `{name}` must be applied to an argument")]
    UnappliedNetwork { span: Span, name: String },
    #[error("{span}: a value of type {ty} cannot be applied")]
    NotAFunction { span: Span, ty: String },
    #[error("{span}: network `{name}` must have type Vector Real m -> Vector Real n with m, n >= 1, found {ty}")]
    InvalidNetworkType { span: Span, name: String, ty: String },
    #[error("{span}: property `{name}` must have type Bool, found {ty}")]
    NonBoolProperty { span: Span, name: String, ty: String },
    #[error("{span}: cannot infer the type of `{name}`; add a type annotation")]
    CannotInfer { span: Span, name: String },
    #[error("{span}: quantifying over functions is not supported (`{name}` : {ty})")]
    QuantifiedFunction { span: Span, name: String, ty: String },
    #[error("{span}: cannot quantify over {ty}")]
    UnsupportedQuantifierDomain { span: Span, ty: String },
    #[error("{span}: equality is not supported at type {ty}")]
    UnsupportedEquality { span: Span, ty: String },
    #[error("{span}: index {index} is out of range for size {size}")]
    IndexOutOfRange { span: Span, index: u64, size: u64 },
    #[error("{span}: `{name}` is declared more than once")]
    DuplicateDeclaration { span: Span, name: String },
}

impl TypeError {
    pub fn span(&self) -> Span {
        match self {
            TypeError::Mismatch { span, .. }
            | TypeError::Unbound { span, .. }
            | TypeError::UnappliedNetwork { span, .. }
            | TypeError::NotAFunction { span, .. }
            | TypeError::InvalidNetworkType { span, .. }
            | TypeError::NonBoolProperty { span, .. }
            | TypeError::CannotInfer { span, .. }
            | TypeError::QuantifiedFunction { span, .. }
            | TypeError::UnsupportedQuantifierDomain { span, .. }
            | TypeError::UnsupportedEquality { span, .. }
            | TypeError::IndexOutOfRange { span, .. }
            | TypeError::DuplicateDeclaration { span, .. } => *span,
        }
    }

    /// Short class name used in diagnostics.
    pub fn class(&self) -> &'static str {
        match self {
            TypeError::QuantifiedFunction { .. } => "QuantifiedFunction",
            _ => "TypeError",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("type error at {0}")]
    Type(#[from] TypeError),
}

impl FrontendError {
    pub fn span(&self) -> Span {
        match self {
            FrontendError::Parse(e) => e.span,
            FrontendError::Type(e) => e.span(),
        }
    }
}

/// Parses and type checks a whole source file.
pub fn load(source: &str) -> Result<TypedProgram, FrontendError> {
    let decls = parse(source)?;
    Ok(typecheck(&decls)?)
}
