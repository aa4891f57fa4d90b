use thiserror::Error;

/// Errors raised by the operator constructors and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OvmError {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    /// Two numerical routes that must agree did not, at this truncation.
    #[error("truncation too small for {what}: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    TruncationTooSmall {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("momentum {p} outside the reliable band |p| <= {band:.3} of dimension {dim}")]
    OutsideReliableBand { p: f64, band: f64, dim: usize },

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("region is not representable by a Kraus generator set: {0}")]
    NotRepresentable(String),

    #[error("state does not have even parity (odd weight {odd_weight:.3e})")]
    OddParity { odd_weight: f64 },

    #[error("squeezing parameter |r| = {r} exceeds 1; truncation blow-up")]
    TruncationRisk { r: f64 },

    #[error("ordering parameter s = {s} is singular (s must be < 1)")]
    SingularParameter { s: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A quantity that must be real carried an imaginary part above 1e-10.
    #[error("imaginary residue {residue:.3e} in {what}")]
    NonReal { what: String, residue: f64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("io: {0}")]
    Io(String),
}

impl OvmError {
    pub(crate) fn truncation(what: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        OvmError::TruncationTooSmall {
            what: what.into(),
            deviation,
            tolerance,
        }
    }

    /// True for the numerical failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            OvmError::TruncationTooSmall { .. }
                | OvmError::OutsideReliableBand { .. }
                | OvmError::NonReal { .. }
                | OvmError::TruncationRisk { .. }
        )
    }
}

impl From<std::io::Error> for OvmError {
    fn from(e: std::io::Error) -> Self {
        OvmError::Io(e.to_string())
    }
}

pub type Result<T, E = OvmError> = std::result::Result<T, E>;
