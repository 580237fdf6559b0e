use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inclusion-exclusion limited to {cap} points, got {got}")]
    CapExceeded { cap: usize, got: usize },

    #[error("matrix is singular or not invertible within tolerance")]
    SingularMatrix,

    #[error("desirability map undefined at {value} (coordinate {coordinate})")]
    DesirabilityDomain { coordinate: usize, value: f64 },

    #[error("invalid desirability map: {0}")]
    InvalidDesirability(String),

    #[error("negative side length {0}")]
    NegativeLength(f64),

    #[error("truncation mass {mass:e} below threshold")]
    TruncationMass { mass: f64 },

    #[error("empty approximation set")]
    EmptySet,

    #[error("empty weight set")]
    EmptyWeights,

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("boundary weight not supported: component {0} is zero")]
    BoundaryWeight(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("weight density cannot be integrated exactly: {0}")]
    UnsupportedDensity(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("Gaussian-process fit failed: {0}")]
    GpFit(String),

    #[error("search exhausted {trials} trials without a counterexample")]
    SearchExhausted { trials: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}
