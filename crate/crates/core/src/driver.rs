//! The whole pipeline for one property: compile, then post-process.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::backend::{postprocess, EmittedProperty, Options};
use crate::compiler::{compile_property, CompileError, Compiled};
use crate::frontend::{CheckedProperty, Span, TypedProgram};

/// Declared network shapes, `(inputs, outputs)` by name.
pub fn signatures(prog: &TypedProgram) -> BTreeMap<String, (u64, u64)> {
    prog.networks.iter().map(|n| (n.name.clone(), (n.inputs as u64, n.outputs as u64))).collect()
}

#[derive(Clone, Debug)]
pub struct CompiledProperty {
    pub name: String,
    pub span: Span,
    pub compiled: Compiled,
    pub emitted: EmittedProperty,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: property `{name}`: {error}")]
pub struct PropertyError {
    pub name: String,
    pub span: Span,
    pub error: CompileError,
}

pub fn compile_checked(
    signatures: &BTreeMap<String, (u64, u64)>,
    p: &CheckedProperty,
    options: Options,
) -> Result<CompiledProperty, PropertyError> {
    let compiled = compile_property(signatures.clone(), &p.expr).map_err(|error| PropertyError {
        name: p.name.clone(),
        span: p.span,
        error,
    })?;
    let emitted = postprocess(&p.name, &compiled, options);
    Ok(CompiledProperty { name: p.name.clone(), span: p.span, compiled, emitted })
}

/// Compiles every property of a program in declaration order.
pub fn compile_program(prog: &TypedProgram, options: Options) -> Vec<Result<CompiledProperty, PropertyError>> {
    let sigs = signatures(prog);
    prog.properties.iter().map(|p| compile_checked(&sigs, p, options)).collect()
}
