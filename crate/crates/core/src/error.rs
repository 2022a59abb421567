use thiserror::Error;

/// Errors produced by the construction and certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid rank {0}: rank must be at least 1")]
    InvalidRank(usize),
    #[error("invalid root: {0}")]
    InvalidRoot(String),
    #[error("variable count mismatch: expected {expected}, got {got}")]
    VarCountMismatch { expected: usize, got: usize },
    #[error("variable index {index} out of range for {nvars} variables")]
    VarOutOfRange { index: usize, nvars: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("sign search exceeded its budget of {budget} nodes")]
    SearchSpaceTooLarge { budget: u64 },
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("rank {rank} too small for {what}")]
    RankTooSmall { rank: usize, what: String },
    #[error("matrix is not skew-symmetric")]
    NotSkew,
    #[error("no closed form implemented for m={m}, n={n}")]
    Unimplemented { m: usize, n: usize },
    #[error("trajectory diverged at t={time}")]
    Divergence { time: f64 },
    #[error("no Lax pair for {0}")]
    NoLaxPair(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
