use thiserror::Error;

/// Errors shared across the simulation pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Hilbert-space dimension overflows u64 for L={sites}, N={particles}")]
    DimensionOverflow { sites: usize, particles: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u64, cap: u64 },

    #[error("state does not belong to the (L={sites}, N={particles}) basis: {reason}")]
    Membership {
        sites: usize,
        particles: usize,
        reason: String,
    },

    #[error("index {index} out of range for basis dimension {dim}")]
    IndexRange { index: usize, dim: usize },

    #[error("staggered pattern needs L >= 2N-1, got L={sites}, N={particles}")]
    Capacity { sites: usize, particles: usize },

    #[error("vector length {got} does not match dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state is not normalized: |psi| = {norm}")]
    NotNormalized { norm: f64 },

    #[error("propagation failed at t={t}: {reason}")]
    Propagation { t: f64, reason: String },

    #[error("QFI is not positive; the Cramer-Rao bound is unbounded")]
    ZeroQfi,

    #[error("negative QFI {value} beyond the round-off floor; likely an invariant violation")]
    NegativeQfi { value: f64 },

    #[error("finite-difference step too large: Richardson estimates disagree by {disagreement:.3e}")]
    FdStepTooLarge { disagreement: f64 },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("power-law fit requires positive values: {0}")]
    NonPositiveFitData(String),

    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, Error>;
