//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input key sequence is empty")]
    EmptyInput,
    #[error("input keys must be strictly increasing (violation near index {0})")]
    UnsortedInput(usize),
    #[error("payload count {payloads} does not match key count {keys}")]
    LengthMismatch { keys: usize, payloads: usize },
    #[error("index would exceed the configured hard key limit of {0}")]
    CapacityExhausted(u64),
    #[error("operation requires a nonempty index")]
    EmptyIndex,
    #[error("poisoning requires at least 2 clean keys, got {0}")]
    InsufficientKeys(usize),
    #[error("invalid key range: min {min} exceeds max {max}")]
    InvalidRange { min: u64, max: u64 },
    #[error("control stream requires a nonempty holdout set")]
    EmptyHoldout,
    #[error("only {available} distinct keys available, {needed} needed")]
    InsufficientDistinctKeys { available: usize, needed: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("malformed key file: {0}")]
    MalformedFile(String),
    #[error("bin count must satisfy 1 <= bins <= number of clean keys, got {0}")]
    InvalidBins(usize),
    #[error("monotonic clock reported a zero-length measurement interval")]
    ClockError,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
