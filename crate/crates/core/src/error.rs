use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },

    #[error("not an Orlicz function: {0}")]
    InvalidFunction(String),

    #[error("numeric overflow in {0}")]
    Overflow(String),

    #[error("value {0} exceeds the representable range of the function")]
    InverseOutOfRange(f64),

    #[error("vector is not on the unit sphere (norm {norm})")]
    NotOnSphere { norm: f64 },

    #[error("Luxemburg norm bisection did not converge (residual {residual})")]
    NormNotConverged { residual: f64 },

    #[error("exponent q = {q} does not exceed the upper index bracket {beta_high}")]
    QNotAboveBeta { q: f64, beta_high: f64 },

    #[error("constant C = {c} is below 1e-12; q is too close to the upper index")]
    DegenerateConstant { c: f64 },

    #[error("degree-{degree} truncation tail {tail} exceeds budget {budget} at level {level}")]
    TruncationBudget {
        level: usize,
        degree: usize,
        tail: f64,
        budget: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid vector: {0}")]
    InvalidVector(String),
}

pub type Result<T> = std::result::Result<T, Error>;
