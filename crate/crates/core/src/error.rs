use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("size mismatch: {left} sites vs {right} sites")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{sites} sites exceeds the configured cap of {cap}")]
    SiteCap { sites: usize, cap: usize },

    #[error(
        "eigensolver did not converge: {converged}/{requested} pairs after {iterations} matvecs"
    )]
    NotConverged {
        converged: usize,
        requested: usize,
        iterations: usize,
        eigenvalues: Vec<f64>,
        residuals: Vec<f64>,
    },

    #[error("degeneracy violation: expected a ground cluster of {expected}, observed {observed}")]
    DegeneracyViolation {
        expected: usize,
        observed: usize,
        eigenvalues: Vec<f64>,
    },

    #[error("logical frame inconsistent with ground space: {0}")]
    FrameInconsistent(String),

    #[error("no logical operator set satisfies the frame invariants on {lx}x{ly}")]
    NoLogicals { lx: usize, ly: usize },

    #[error("basis continuity lost: minimum overlap {min_overlap:.3} below 0.5")]
    ContinuityLost { min_overlap: f64 },

    #[error("not enough valid points: {valid} usable, {required} required")]
    InsufficientData { valid: usize, required: usize },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("gate compilation reached fidelity {fidelity}, below the requested tolerance")]
    CompileFailed { fidelity: f64 },

    #[error("time step too large: rotation angle {angle:.3} rad per step exceeds 0.1")]
    StepTooLarge { angle: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
