use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("scheme requires {expected}")]
    TopologyMismatch { expected: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The system fails the row-rank test; callers resample the channel.
    #[error("ill-conditioned system (smallest singular value {smallest:e}, largest {largest:e})")]
    IllConditioned { smallest: f64, largest: f64 },

    #[error("infeasible relay count: {available} available, required relays: {required}")]
    InfeasibleRelayCount { required: usize, available: usize },

    #[error("degenerate denominator (magnitude {magnitude:e})")]
    DegenerateDenominator { magnitude: f64 },

    #[error("alignment system has a trivial null space")]
    EmptyNullSpace,

    #[error("alignment not verified at receiver {receiver}")]
    AlignmentNotVerified { receiver: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("{skipped} of {trials} trials skipped (limit is 1%)")]
    TooManySkipped { skipped: usize, trials: usize },
}

impl Error {
    /// Whether a fresh channel draw can clear this error.
    pub fn is_resample_trigger(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. } | Error::DegenerateDenominator { .. }
        )
    }
}
