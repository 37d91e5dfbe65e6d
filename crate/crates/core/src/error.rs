use thiserror::Error;

use crate::network::VertexId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent p = {0}: p must be finite and at least 1")]
    InvalidExponent(f64),

    #[error("this operation needs p > 1 (got p = {0}); use the p = 1 routines instead")]
    RequiresPAboveOne(f64),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("vertices {0} and {1} are not joined by a positive-conductance edge")]
    NotAdjacent(VertexId, VertexId),

    #[error("a cycle must have at least one edge and end where it starts")]
    OpenCycle,

    #[error("cycle law violated: residual {residual:e} around cycle {cycle:?}")]
    CycleLaw { residual: f64, cycle: Vec<VertexId> },

    #[error("node law violated at vertex {vertex}: residual {residual:e}")]
    NodeLaw { vertex: VertexId, residual: f64 },

    #[error("flow has zero strength")]
    ZeroStrength,

    #[error("infeasible potential: {0}")]
    Infeasible(String),

    #[error("vertex {0} has no positive-conductance neighbour")]
    IsolatedVertex(VertexId),

    #[error("lattice needs {required} vertices, budget is {budget}")]
    BudgetExceeded { required: u128, budget: usize },

    #[error("p = 1 primal value {primal} and bottleneck dual {dual} disagree")]
    DualityMismatch { primal: f64, dual: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
