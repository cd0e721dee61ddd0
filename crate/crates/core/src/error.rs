use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("diagram has {0} levels, above the supported maximum")]
    TooManyLevels(usize),
    #[error("truth table over {0} levels is too large to enumerate")]
    TableTooLarge(usize),
    #[error("leaf payload must be 1..=63 bytes, got {0}")]
    PayloadLength(usize),
    #[error("input has {actual} bits, expected {expected}")]
    InputLength { expected: usize, actual: usize },
    #[error("input pad bits are not zero")]
    NonZeroPadding,
    #[error("value {value} does not fit in {width} bits")]
    ValueTooWide { value: u64, width: usize },
    #[error("level count mismatch: expected {expected}, got {actual}")]
    LevelMismatch { expected: usize, actual: usize },
    #[error("diagram payloads are not boolean")]
    NonBoolean,
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("invalid predicate parameters: {0}")]
    InvalidPredicate(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("polygon is not convex")]
    NonConvex,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("invalid validity window: {from} > {to}")]
    InvalidWindow { from: u64, to: u64 },
}
