//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by evaluation, quadrature, construction and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} is outside the domain: {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("quadrature did not reach tolerance {requested:e} (estimated error {achieved:e})")]
    QuadratureFailure { requested: f64, achieved: f64 },

    #[error("tail integral could not be certified finite: {0}")]
    TailDivergence(String),

    #[error("sampling grid needs at least two points, got {0}")]
    InvalidGrid(usize),

    #[error("Potter slack {delta} outside the admissible window [0, {limit})")]
    InvalidDelta { delta: f64, limit: f64 },

    #[error("no admissible radius found: {0}")]
    NotFound(String),

    #[error("invalid kernel profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("field has no bounded far-field rule")]
    UnboundedField,

    #[error("operator family is empty")]
    EmptyFamily,

    #[error("stencil weight {weight:e} at offset index {offset} is negative")]
    NonMonotoneStencil { offset: usize, weight: f64 },

    #[error("iteration did not converge in {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("point is not in the contact set")]
    NoContactPoint,
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
