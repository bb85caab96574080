use std::fmt;

use rug::Float;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    Domain(String),
    /// A bracketing root search was handed an interval without a sign change.
    NoBracket { a: f64, b: f64 },
    /// Adaptive quadrature failed to reach the requested tolerance.
    ///
    /// Carries the partial estimate and the error bound it reached.
    QuadratureNonConvergence {
        partial: Box<Float>,
        error_bound: Box<Float>,
        panels: usize,
    },
    /// The integrand returned a NaN or infinity.
    BadIntegrand { at: f64 },
    /// A factorization pivot came out non-positive; the moment matrix is not
    /// numerically positive definite at this precision.
    NotPositiveDefinite { pivot_index: usize },
    /// The running loss-of-precision estimate exceeded the safe budget.
    /// Re-run with more mantissa bits.
    RaisePrecision { detail: String },
    /// A boundary value on a cut was requested without saying from which side.
    SideRequired,
    /// An integration path would cross a cut or pass through a pole.
    BadPath(String),
    /// The theta series does not converge (Im of the period is not positive).
    ThetaDivergent,
    /// A theta factor in the outer model matrix vanished at the requested point.
    ThetaZero { factor: &'static str },
    /// A certified tail bound could not be established.
    TailBound(String),
    /// Branch/orientation bookkeeping produced an inconsistent configuration.
    BranchConfiguration(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NoBracket { a, b } => {
                write!(f, "no sign change on bracket [{a}, {b}]")
            }
            Error::QuadratureNonConvergence { panels, .. } => {
                write!(f, "quadrature did not converge after {panels} panels")
            }
            Error::BadIntegrand { at } => {
                write!(f, "integrand returned a non-finite value near {at}")
            }
            Error::NotPositiveDefinite { pivot_index } => {
                write!(f, "non-positive pivot at index {pivot_index}")
            }
            Error::RaisePrecision { detail } => {
                write!(f, "insufficient working precision: {detail}")
            }
            Error::SideRequired => {
                write!(f, "point lies on a cut; a side (+/-) must be given")
            }
            Error::BadPath(msg) => write!(f, "invalid integration path: {msg}"),
            Error::ThetaDivergent => {
                write!(f, "theta series diverges: period has non-positive imaginary part")
            }
            Error::ThetaZero { factor } => {
                write!(f, "theta factor {factor} vanishes at the requested point")
            }
            Error::TailBound(msg) => write!(f, "tail bound failed: {msg}"),
            Error::BranchConfiguration(msg) => write!(f, "branch configuration: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
