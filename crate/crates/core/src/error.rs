use thiserror::Error;

/// Errors reported by the evaluation, calculus and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("series did not converge within {shells} shells (last shell magnitude {last_shell:e})")]
    NotConverged { shells: usize, last_shell: f64 },

    #[error("transform is singular at s = {0}")]
    SingularTransform(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("quadrature did not settle: {0}")]
    QuadratureDivergence(String),

    #[error("singular time step: leading coefficient {0:e} vanishes")]
    SingularStep(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
