use thiserror::Error;

use crate::potential::SurfaceClass;

/// Errors produced by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),

    #[error("matrix is not skew-Hermitian (residual {0:e})")]
    NotSkewHermitian(f64),

    #[error("cubic has complex roots (discriminant {0:e})")]
    ComplexRoots(f64),

    #[error("degenerate surface: {class:?}")]
    Degenerate { class: SurfaceClass },

    #[error("repeated eigenvalues of the potential (gap {0:e}); the surface is flat")]
    RepeatedEigenvalues(f64),

    #[error("singular locus at y = {y}: {what}; use the eigenbasis route")]
    SingularLocus { y: f64, what: &'static str },

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("wrong regime for this evaluator: {0}")]
    Regime(&'static str),

    #[error("chart undefined: |F3| = {0:e}")]
    Chart(f64),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
