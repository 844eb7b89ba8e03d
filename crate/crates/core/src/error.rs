use num_bigint::BigUint;
use thiserror::Error;

/// Errors produced by the `lpp-core` routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution parameter: {0}")]
    InvalidDistribution(String),

    #[error("log-MGF argument {nu} outside domain (must be < {sup})")]
    MgfDomain { nu: f64, sup: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a probability vector: {0}")]
    NotOnSimplex(String),

    #[error("path enumeration cap exceeded: {steps} steps > cap {cap} ({count} paths)")]
    EnumerationCap {
        steps: u64,
        cap: u64,
        count: BigUint,
    },

    #[error("target {target:?} lies outside field box {bounds:?}")]
    OutsideBox {
        target: Vec<usize>,
        bounds: Vec<usize>,
    },

    #[error("weight field of {cells} cells exceeds cap of {cap} cells")]
    FieldTooLarge { cells: u128, cap: u128 },

    #[error("scale n = {n} needs a field of {cells} cells, above the cap of {cap}")]
    ScaleTooLarge { n: u64, cells: u128, cap: u128 },

    #[error("l = {l} is not a multiple of the rationalization scale m = {m}")]
    NotMultipleOfScale { l: u64, m: u64 },

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
