use thiserror::Error;

/// Errors raised by the solvers and diagnostics in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value produced at index {index}")]
    Overflow { index: usize },

    #[error("forcing covers indices {first}..={last}, but indices 1..={horizon} are required")]
    ForcingTooShort {
        first: usize,
        last: usize,
        horizon: usize,
    },

    #[error("nonlinearity `{name}` returned a non-finite value at input {input}")]
    Nonlinearity { name: String, input: f64 },

    #[error(
        "root iteration did not converge after {attempts} attempts (worst residual {residual:e})"
    )]
    Spectral { attempts: usize, residual: f64 },

    #[error("singular multiplier: |1 - kappa| = {gap:e} is at or below 1e-12")]
    SingularMultiplier { gap: f64 },

    #[error("ratio undefined: zero value at index {index}")]
    UndefinedRatio { index: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: String, right: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("convex functional overflowed for input {input}")]
    PhiOverflow { input: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
