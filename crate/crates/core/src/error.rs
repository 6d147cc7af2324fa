use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("malformed rational {0:?}")]
    ParseRational(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero vector has no ray")]
    ZeroVector,

    #[error("cone is not pointed: it contains the line through {0}")]
    NotPointed(String),

    #[error("cone spans only {dim} of {ambient} dimensions")]
    LowerDimensional { dim: usize, ambient: usize },

    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("{record}: {location}: {message}")]
    Invariant {
        record: String,
        location: String,
        message: String,
    },

    #[error("{record}: ray {ray} has no contraction descriptor")]
    MissingDescriptor { record: String, ray: String },

    #[error("{record}: no target edges supplied for candidate ray {ray}")]
    MissingTargets { record: String, ray: String },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("illegal ray type {0:?}")]
    IllegalRayType(String),

    #[error("illegal flop type {0:?}")]
    IllegalFlopType(String),

    #[error("invalid chamber graph: {0}")]
    ChamberGraph(String),

    #[error("flop system underdetermined for {divisor}: kernel dimension {kernel_dim}")]
    Underdetermined { divisor: String, kernel_dim: usize },

    #[error("flop system inconsistent for {divisor}: curves {curves:?} cannot all pair to zero")]
    Inconsistent { divisor: String, curves: Vec<String> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
