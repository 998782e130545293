use thiserror::Error;

use crate::gaussian::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a Gaussian state needs at least one mode")]
    EmptyState,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not symplectic (defect {defect:e})")]
    InvalidOperator { defect: f64 },
    #[error("A + BZ is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("graph is not physical: {0}")]
    NotPhysical(String),
    #[error("result of the transformation is not symmetric (defect {defect:e})")]
    Asymmetric { defect: f64 },
    #[error("invalid wiring: {0}")]
    InvalidWiring(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("state is not pure (det(2σ) = {det})")]
    NotPure { det: f64 },
    #[error("measured quadrature has zero variance")]
    DegenerateMeasurement,
    #[error("inconsistent clip plan: {0}")]
    InconsistentPlan(String),
    #[error("engine mismatch: {0}")]
    EngineMismatch(String),
    #[error("{0}")]
    Document(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
