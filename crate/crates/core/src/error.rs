use alloc::string::String;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate form: {0}")]
    Degenerate(&'static str),
    #[error("unsupported flavor: {0}")]
    Flavor(&'static str),
    #[error("group of order {size} exceeds the cap {cap}")]
    CapExceeded { size: u64, cap: u64 },
    #[error("rank {rank} exceeds the bound {bound}")]
    RankBound { rank: usize, bound: usize },
    #[error("snapping failed: distance {distance:e} to nearest admissible value")]
    Snap { distance: f64 },
    #[error("integer out of machine range")]
    Overflow,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("map is not an isometry: {0}")]
    NotIsometry(String),
    #[error("not found within the configured bounds")]
    NotFound,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;
