use alloc::string::String;

use crate::momentum::RegularityDiagnosis;
use crate::synthesis::AdmissibilityViolation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0}: entries must be finite")]
    NonFinite(&'static str),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not a frame: smallest singular value {sigma_min:e} is below threshold {threshold:e}")]
    NotAFrame { sigma_min: f64, threshold: f64 },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not skew-Hermitian (defect {0:e})")]
    NotSkewHermitian(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("squared norm entry {index} is {value}, must be positive")]
    NonPositiveNorm { index: usize, value: f64 },
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error("inadmissible squared norms: {0}")]
    Inadmissible(AdmissibilityViolation),
    #[error("target is not a regular value: {0}")]
    NotRegular(RegularityDiagnosis),
    #[error("ambiguous eigenvalue clustering: gap {gap:e} is too close to threshold {threshold:e}")]
    AmbiguousClustering { gap: f64, threshold: f64 },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("{which} endpoint is off the fiber (distance {distance:e})")]
    EndpointOffFiber { which: &'static str, distance: f64 },
    #[error("path construction failed near t = {t} after {restarts} restarts: {reason}")]
    ConnectFailed {
        t: f64,
        restarts: usize,
        reason: String,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
