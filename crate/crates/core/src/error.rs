use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric: entries ({i},{j})={a} and ({j},{i})={b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not positive semi-definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveSemiDefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid matrix shape: {0}")]
    Shape(String),

    #[error("jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("function value is not finite at eigenvalue {eigenvalue:e}")]
    NonFiniteAtEigenvalue { eigenvalue: f64 },

    #[error("parameter `{name}` = {value} out of range: {expected}")]
    Parameter {
        name: String,
        value: f64,
        expected: String,
    },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("evaluation failed at x = {x:e}: {reason}")]
    Evaluation { x: f64, reason: String },

    #[error("invalid representing function: {rule} (witness x = {witness:e})")]
    InvalidFunction { rule: String, witness: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid measure: {0}")]
    Measure(String),

    #[error("solver did not converge in {iterations} iterations (kkt residual {kkt_residual:e})")]
    SolverNotConverged {
        iterations: usize,
        kkt_residual: f64,
    },

    #[error("quadrature tolerance not met: estimated error {estimate:e} > {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("epsilon schedule does not converge: gaps {gaps:?}")]
    Regularization { gaps: Vec<f64> },

    #[error("trial {trial} failed: {reason}")]
    Trial { trial: u64, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("io error on {path}: {reason}")]
    Io { path: String, reason: String },

    #[error("json error: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn param(name: &str, value: f64, expected: &str) -> Self {
        Error::Parameter {
            name: name.to_string(),
            value,
            expected: expected.to_string(),
        }
    }
}
