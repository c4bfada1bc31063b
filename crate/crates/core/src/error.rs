use thiserror::Error;

/// Errors raised by the inference algorithms, simulators and I/O layers.
#[derive(Debug, Error)]
pub enum LfiError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("attempt budget of {budget} exceeded while filling slot {slot} (tolerance {epsilon})")]
    AttemptBudgetExceeded { slot: usize, budget: u64, epsilon: f64 },

    #[error("kernel matrix factorization failed after jitter escalation (last jitter {jitter:e})")]
    FactorizationFailure { jitter: f64 },

    #[error("degenerate evidence: all discrepancies identical")]
    DegenerateEvidence,

    #[error("sampler initial point has zero target density")]
    InitInvalid,

    #[error("simulator failed at theta = {theta:?}: {source}")]
    Simulator {
        theta: Vec<f64>,
        #[source]
        source: SimError,
    },

    #[error("alignment failed after {retries} re-simulations (threshold {threshold})")]
    AlignmentFailed { retries: usize, threshold: u64 },

    #[error("particle filter weights collapsed at step {step}")]
    WeightCollapse { step: usize },

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Failure reported by a simulator for a single parameter point.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    /// The parameter point lies outside the region where the model is defined
    /// (for instance a negative expansion-rate radicand). Samplers treat this as
    /// an infinitely distant proposal.
    #[error("unphysical parameters: {0}")]
    Unphysical(String),
    #[error("{0}")]
    Failed(String),
}

pub type Result<T, E = LfiError> = std::result::Result<T, E>;
