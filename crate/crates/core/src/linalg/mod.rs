//! Sparse storage, KKT assembly and LDLᵀ factorization of quasi-definite systems.

mod csc;
mod kkt;
mod ldl;
mod ordering;

pub use csc::CscMatrix;
pub use kkt::{assemble_kkt, KktSystem};
pub use ldl::{ldl_factor, ldl_solve, LdlFactor, NATURAL_ORDERING_BELOW};
pub use ordering::minimum_degree;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("{what} must be strictly positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("matrix must be stored as its upper triangle")]
    NotUpperTriangular,
    #[error("zero pivot at column {0}: matrix is not quasi-definite")]
    ZeroPivot(usize),
    #[error("sparsity pattern differs from the one used at factorization")]
    PatternMismatch,
}
