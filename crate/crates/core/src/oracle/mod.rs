//! Desk-scale ground truth for the compiler: concrete affine networks, an
//! exact decision procedure for emitted queries, an independent semantic
//! evaluator for specifications and the equisatisfiability check tying them
//! together.

pub mod check;
pub mod decide;
pub mod lra;
pub mod networks;
pub mod semantics;

pub use check::{check_equisat, check_program, EquisatReport, PropertyReport};
pub use decide::{decide_query, Verdict};
pub use lra::Limits;
pub use networks::{parse_networks, AffineNetwork, NetworkDecl, NetworkManifest};
pub use semantics::{eval_property, eval_property_grid};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("network `{name}`: {message}")]
    DimensionMismatch { name: String, message: String },
    #[error("no concrete weights for network `{0}`")]
    MissingNetwork(String),
    #[error("non-linear term in the semantics: {0}")]
    NonLinearSemantics(String),
    #[error("problem too large: {size} {what} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("malformed network manifest: {0}")]
    Manifest(String),
}
