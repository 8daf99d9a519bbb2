use thiserror::Error;

/// Errors raised by the core algebra.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("total degree {degree} exceeds the cap of {cap}")]
    DegreeCap { degree: u32, cap: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {n_vars} variables")]
    VariableIndex { index: usize, n_vars: usize },

    #[error("polynomial is not divisible by the linear form (remainder of size {remainder})")]
    NotDivisible { remainder: f64 },

    #[error("linear form is identically zero")]
    ZeroLinearForm,

    #[error("cannot parse polynomial {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("root system rejected: {0}")]
    InvalidRootSystem(String),

    #[error("multiplicity function rejected: {0}")]
    InvalidMultiplicity(String),

    #[error("{0} requires irrational scalars; use floating mode")]
    IrrationalScaling(String),

    #[error("reflection group exceeds {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("hypothesis audit failed: {condition} at {witness:?} (value {value})")]
    Audit { condition: String, witness: Vec<f64>, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
