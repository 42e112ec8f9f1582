use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |h_ij - conj(h_ji)| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("Jacobi diagonalization did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("operator is not unitary (max |U^dag U - I| = {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },
    #[error("invalid mixture weights: {0}")]
    WeightMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid gate targets: {0}")]
    BadTargets(String),
    #[error("invalid bipartition: {0}")]
    BadCut(String),
    #[error("alpha = {alpha} outside the allowed range {range}")]
    BadAlpha { alpha: f64, range: &'static str },
    #[error("tail has length {got}, expected {expected}")]
    BadTail { got: usize, expected: usize },
    #[error("qubit count {0} is invalid (need n >= 2)")]
    BadN(usize),
    #[error("labels are incompatible: {0}")]
    LabelMismatch(String),
    #[error("Schmidt rank {rank} across the cut exceeds 2")]
    RankTooHigh { rank: usize },
    #[error("input dimension does not match the protocol registers: {0}")]
    BadDimension(String),
    #[error("measurement operators do not resolve the identity (defect {defect:e}) at step {step}")]
    IncompleteMeasurement { step: usize, defect: f64 },
    #[error("coefficient matrix is singular (|det| = {det:e})")]
    SingularCoefficients { det: f64 },
    #[error("invalid range: {0}")]
    BadRange(String),
    #[error("cannot parse label {input:?}: {reason}")]
    BadLabel { input: String, reason: String },
    #[error("states are not mutually orthogonal: {0}")]
    NotOrthogonal(String),
    #[error("protocol violates locality: {0}")]
    Locality(String),
}
