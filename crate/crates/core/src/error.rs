use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid rank {rank}: must satisfy {constraint}")]
    InvalidRank { rank: usize, constraint: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("rank-{rank} projection is singular (sigma_{rank} = {sigma:e})")]
    RankDeficientProjection { rank: usize, sigma: f64 },

    #[error("ill-conditioned triangular factor: |r_{index}{index}| = {value:e} below threshold {threshold:e}")]
    IllConditionedTriangular {
        index: usize,
        value: f64,
        threshold: f64,
    },

    #[error("ambiguous numerical rank {rank}: singular value gap ratio {gap:.3e} below {min_gap}")]
    AmbiguousRank { rank: usize, gap: f64, min_gap: f64 },

    #[error("kernel iteration did not converge within {iterations} steps (last shift {shift:e})")]
    InnerIterationFailure { iterations: usize, shift: f64 },

    #[error("basis is not orthonormal (deviation {deviation:e})")]
    InvalidBasis { deviation: f64 },

    #[error("numeric breakdown: {0}")]
    NumericBreakdown(String),

    #[error("nothing to deflate: Jacobian rank {rank} in {dim} unknowns leaves no excess nullity")]
    NothingToDeflate { rank: usize, dim: usize },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("variable lists differ")]
    VariableMismatch,

    #[error("unknown catalog entry `{0}`")]
    UnknownSystem(String),

    #[error("fewer than {needed} qualifying steps for a rate fit (found {found})")]
    InsufficientSteps { needed: usize, found: usize },

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    #[error("deflation level {level}: {source}")]
    AtLevel { level: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn dims(expected: impl core::fmt::Display, found: impl core::fmt::Display) -> Self {
        Error::DimensionMismatch {
            expected: alloc::format!("{expected}"),
            found: alloc::format!("{found}"),
        }
    }

    /// Strips step/level wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::AtLevel { source, .. } => source.root(),
            e => e,
        }
    }
}
