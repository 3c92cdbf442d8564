//! Compiler from neural-network specifications to linear solver queries.

pub mod backend;
pub mod compiler;
pub mod driver;
pub mod frontend;
pub mod normalizer;
pub mod oracle;
pub mod query;
pub mod rational;
pub mod state;
pub mod unblock;
