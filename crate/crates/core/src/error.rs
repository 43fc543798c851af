use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input component")]
    NonFiniteInput,

    #[error("point is not in the set (distance {distance:.3e})")]
    NotInSet { distance: f64 },

    #[error("probe step {eps:.3e} rejects every normal direction candidate")]
    EpsilonTooLarge { eps: f64 },

    #[error("no point of the set found in the sampling ball")]
    EmptySample,

    #[error("every sampled point lies in the intersection")]
    DegenerateScenario,

    #[error("intersection locator neither converged nor certified emptiness")]
    IntersectionLocatorFailed,

    #[error("normal pair component is not unit length (norm {norm:.3e})")]
    NonUnitPair { norm: f64 },

    #[error("estimates were produced from different harvested pair lists")]
    InconsistentInputs,

    #[error("equivalence check requires a convex scenario")]
    NonConvexScenario,

    #[error("no linear decay to fit: {reason}")]
    NoDecay { reason: String },

    #[error("scenario file is malformed: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
