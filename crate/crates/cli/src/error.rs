use std::fmt;

use catlocc::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or inputs; exit status 2.
    Validation(String),
    /// Numerical or I/O failure; exit status 1.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotHermitian { .. }
            | Error::NoConvergence { .. }
            | Error::NotSquare { .. }
            | Error::ShapeMismatch(_)
            | Error::NotUnitary { .. }
            | Error::IncompleteMeasurement { .. }
            | Error::Locality(_)
            | Error::BadDimension(_)
            | Error::BadTargets(_)
            | Error::RankTooHigh { .. }
            | Error::WeightMismatch(_) => CliError::Internal(e.to_string()),
            Error::NotNormalized { .. }
            | Error::DimensionMismatch(_)
            | Error::BadCut(_)
            | Error::BadAlpha { .. }
            | Error::BadTail { .. }
            | Error::BadN(_)
            | Error::LabelMismatch(_)
            | Error::SingularCoefficients { .. }
            | Error::BadRange(_)
            | Error::BadLabel { .. }
            | Error::NotOrthogonal(_) => CliError::Validation(e.to_string()),
        }
    }
}
