use thiserror::Error;

/// Errors raised by evaluators, simulators and verification checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma pole: {0}")]
    Pole(String),

    #[error("hypergeometric series diverges: {0}")]
    Divergence(String),

    #[error("series did not converge after {terms} terms (tail {tail:e})")]
    NonConverged { terms: usize, tail: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("eigenvalue collision at step {step} (gap {gap:e})")]
    Collision { step: usize, gap: f64 },

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("singular state at step {step} (min eigenvalue {min_eig:e})")]
    SingularState { step: usize, min_eig: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
