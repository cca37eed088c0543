use core::fmt;

/// Which inequality of the positive recurrence condition fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceViolation {
    /// `μ₂ < 0` fails.
    NonNegativeVerticalDrift,
    /// `r₊ < μ₁/μ₂` fails.
    PlusSlope,
    /// `μ₁/μ₂ < r₋` fails.
    MinusSlope,
}

impl fmt::Display for RecurrenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecurrenceViolation::NonNegativeVerticalDrift => f.write_str("mu2 < 0"),
            RecurrenceViolation::PlusSlope => f.write_str("r_plus < mu1/mu2"),
            RecurrenceViolation::MinusSlope => f.write_str("mu1/mu2 < r_minus"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("covariance matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("model is not positive recurrent: {0} does not hold")]
    NotRecurrent(RecurrenceViolation),
    #[error("density point has negative height v = {0}")]
    NegativeHeight(f64),
    #[error("phase unwrapping failed at t = {at}: jump of {jump} rad (grid too coarse)")]
    UnwrapFailure { at: f64, jump: f64 },
    #[error("log-coefficient table does not reach its limit at the truncation: |h(±T)| = {0}")]
    TailMismatch(f64),
    #[error("Cauchy integral requested on the real axis (Im z = {0}); use the principal value")]
    OnRealAxis(f64),
    #[error("normalization mismatch: minus side gives {got}, expected {expected}")]
    NormalizationMismatch { got: f64, expected: f64 },
    #[error("x = {re}{im:+}i lies outside the half-plane of convergence of this side")]
    WrongHalfPlane { re: f64, im: f64 },
    #[error("kernel vanishes at the requested point and the numerator does not")]
    KernelZero,
    #[error("u = {0} lies on the wrong side of the origin for this boundary density")]
    DomainMismatch(f64),
    #[error("the density is singular at the origin")]
    OriginSingular,
    #[error("tail fit needs at least 20 samples with u_max/u_min of at least 4")]
    InsufficientRange,
    #[error("grids are not compatible: {0}")]
    GridMismatch(&'static str),
    #[error("negative density {value} at (u, v) = ({u}, {v}) beyond quadrature noise")]
    NegativeDensity { u: f64, v: f64, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
