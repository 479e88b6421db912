use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum Error {
    #[error("factor map {factors} is not canonical")]
    NonCanonical { factors: String },
    #[error("raw integral offset {offset} does not balance factor exponents (expected {expected})")]
    HomogeneityViolation { offset: i64, expected: i64 },
    #[error("resource limit: {what}")]
    ResourceLimit { what: String },
    #[error("unsupported: {what}")]
    Unsupported { what: String },
    #[error("order mismatch: {what}")]
    OrderMismatch { what: String },
    #[error("SDP did not converge: {what}")]
    NumericalFailure { what: String },
    #[error("infeasible at alpha={alpha}: violation {violation:.3e}")]
    Infeasible { alpha: f64, violation: f64 },
    #[error("unresolved parameter: {name}")]
    UnresolvedParameter { name: String },
    #[error("fitted parameters violate the matching constraints: {what}")]
    ResidualMismatch { what: String },
    #[error("polynomial vanishes at interval endpoint {at}")]
    EndpointRoot { at: String },
    #[error("quadrature did not converge: {what}")]
    QuadratureNonConvergence { what: String },
    #[error("spectral differentiation ill-conditioned for order {order}")]
    SpectralIllConditioned { order: u32 },
    #[error("invalid input: {what}")]
    InvalidInput { what: String },
    #[error("parse error: {what}")]
    Parse { what: String },
}

impl Error {
    pub fn invalid(what: impl Into<String>) -> Self {
        Error::InvalidInput { what: what.into() }
    }

    pub fn parse(what: impl Into<String>) -> Self {
        Error::Parse { what: what.into() }
    }
}
