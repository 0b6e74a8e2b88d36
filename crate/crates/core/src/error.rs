//! Error type shared by all solver and inequality modules.

use crate::hum::HumResult;

/// Errors produced by mesh construction, solvers and inequality checks.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scalar argument lies outside the admissible range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A time or space coordinate lies outside the domain of a weight function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested weighted integral does not converge.
    #[error("singular integral: {0}")]
    SingularIntegral(String),

    /// A linear solve hit a zero or near-zero pivot.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// A structural hypothesis of the estimate (coupling bounded below on
    /// the inner window) does not hold for the supplied configuration.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// A parameter is outside the range the formula is stated for.
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    /// Unknown manufactured-solution profile id.
    #[error("unknown profile: {0}")]
    UnknownProfile(String),

    /// Conjugate gradient ran out of iterations; the best iterate and its
    /// diagnostics are attached so the caller can inspect how close it got.
    #[error("cg did not converge: residual {residual:.3e} after {iterations} iterations")]
    CgDidNotConverge {
        iterations: usize,
        residual: f64,
        best: Box<HumResult>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
