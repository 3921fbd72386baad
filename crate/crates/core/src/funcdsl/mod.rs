//! Orlicz functions given as expressions over `t` or as catalog entries.

mod ast;
mod function;
pub(crate) mod logval;

pub use ast::{parse, Expr, OrliczExpr};
pub use function::{
    AffineTail, Continuation, FunctionSpec, GridSpec, OrliczFunction, Property, ValidateOptions,
    ValidationReport, Violation,
};
