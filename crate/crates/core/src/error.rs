use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("basis vectors are not orthonormal (max defect {defect})")]
    NonOrthonormalBasis { defect: f64 },

    #[error("impossible outcome: probability {probability} is below the zero threshold")]
    ImpossibleOutcome { probability: f64 },

    #[error("internal consistency failure: probability has imaginary part {imag}")]
    ImaginaryProbability { imag: f64 },

    #[error("behavior violates no-signaling (max marginal discrepancy {discrepancy})")]
    SignalingBehavior { discrepancy: f64 },

    #[error("outcome count d={d} outside supported range [{min}, {max}]")]
    OutcomeCountOutOfRange { d: usize, min: usize, max: usize },

    #[error("linear program inconclusive: iteration cap {iterations} exceeded")]
    LpInconclusive { iterations: usize },

    #[error("linear program unbounded")]
    LpUnbounded,

    #[error("linear program infeasible at phase 1")]
    LpPhase1Infeasible,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
