use thiserror::Error;

/// Errors raised by the numerical kernels and operator builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole in denominator parameter b[{param}] at k = {k}")]
    Pole { param: usize, k: usize },

    #[error("singular factor: {0}")]
    Singular(String),

    #[error("empty sector: degree {degree} exceeds {sites} sites x cap {cap}")]
    EmptySector { sites: usize, degree: usize, cap: usize },

    #[error("monomial {0:?} is not a member of the sector")]
    NotFound(Vec<usize>),

    #[error(
        "Fock trace did not converge after {terms} terms (observed ratio {ratio:.3e}); \
         choose a field phi inside the convergence region of this trace"
    )]
    Divergence { terms: usize, ratio: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
