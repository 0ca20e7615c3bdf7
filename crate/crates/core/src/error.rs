use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("image domain must have positive dimensions, got {w}x{h}")]
    InvalidDomain { w: u32, h: u32 },

    #[error("image width must be at least 2 for base functions, got {w}")]
    WidthTooSmall { w: u32 },

    #[error("pixel ({x},{y}) lies outside the {w}x{h} domain")]
    PixelOutOfBounds { x: u32, y: u32, w: u32, h: u32 },

    #[error("operands belong to different domains")]
    DomainMismatch,

    #[error("ensemble must be a non-empty collection of non-empty patterns")]
    EmptyEnsemble,

    #[error("ensemble contains an empty pattern")]
    EmptyPattern,

    #[error("ensemble is not a partition: {0}")]
    NotAPartition(&'static str),

    #[error("first partition does not refine the second")]
    NotARefinement,

    #[error("target pattern is not combinable from the source ensemble")]
    NotCombinable,

    #[error("{what} must be a power of two, got {n}")]
    NotPowerOfTwo { what: &'static str, n: u64 },

    #[error("tree builder needs at least one input partition")]
    EmptyInput,

    #[error("image dimensions do not match the circuit domain")]
    DimensionMismatch,

    #[error("image value {value} exceeds the safe magnitude {limit} for a {w}x{h} image")]
    ValueOutOfRange { value: i64, limit: i64, w: u32, h: u32 },

    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("pattern cannot be decomposed into previous-level patterns")]
    DecompositionFailure,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid partition tree: {0}")]
    InvalidTree(String),
}

pub type Result<T> = std::result::Result<T, Error>;
