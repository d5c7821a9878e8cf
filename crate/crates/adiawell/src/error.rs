use num_complex::Complex64;
use thiserror::Error;

use crate::branchfns::Sheet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re}{im:+}i is not valid on sheet {sheet:?}")]
    BranchViolation { re: f64, im: f64, sheet: Sheet },
    #[error("pole of the reflection coefficient at {0}")]
    PoleAt(Complex64),
    #[error("accuracy loss in {what} at {at}")]
    AccuracyLoss { what: &'static str, at: Complex64 },
    #[error("quadrature for {what} did not converge (estimated error {est_error:e})")]
    QuadratureFailure { what: &'static str, est_error: f64 },
    #[error("argument {0} lies on the cut [1/2, inf)")]
    OnCut(Complex64),
    #[error("mode {n} has no eigenvalue at tau = {tau}")]
    NoEigenvalue { n: u32, tau: f64 },
    #[error("continuation of the complex root failed at xi = {xi}: {reason}")]
    ContinuationFailure { xi: f64, reason: &'static str },
    #[error("no admissible contour through {0}")]
    ContourClash(Complex64),
    #[error("series truncation too small: tail estimate {0:e}")]
    TruncationTooSmall(f64),
    #[error("steepest-descent trace diverged near {0}")]
    TraceDiverged(Complex64),
    #[error("tridiagonal solve broke down at row {0}")]
    LinearSolveFailure(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Validation failures map to exit code 2, numerical ones to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_) | Error::BranchViolation { .. } | Error::OnCut(_) | Error::NoEigenvalue { .. }
        )
    }
}
