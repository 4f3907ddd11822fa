use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight {0:?} is not dominant")]
    NonDominant(Vec<i64>),
    #[error("weight {0:?} is singular (lies on a wall)")]
    SingularWeight(Vec<i64>),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point lies on the singular locus (|value| = {0:e})")]
    SingularLocus(f64),
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i64),
    #[error("ill-conditioned computation: {0}")]
    IllConditioned(String),
    #[error("quadrature did not converge: change {change:e} after refinement {n} -> {refined}")]
    Convergence { change: f64, n: usize, refined: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
