//! Exact, asymptotic and stochastic evaluation of the GUE average
//!
//! ```text
//! E_N(z,t) = < prod_j exp(-z^2/(2 x_j^2) + t/x_j) >_GUE
//! ```
//!
//! over spectra `x_1..x_N` of the Gaussian Unitary Ensemble, together with
//! the supporting machinery: moments of the singular weight
//! `exp(-z^2/(2x^2) + t/x - x^2/2)`, Hankel/orthogonal-polynomial
//! factorizations, the two-cut equilibrium measure of the rescaled potential,
//! elliptic data and theta functions of the spectral curve, the outer model
//! matrix of the associated Riemann-Hilbert problem, and Monte Carlo
//! estimation as an independent stochastic cross-check.
//!
//! Everything runs in arbitrary precision (MPFR/MPC via `rug`); each routine
//! takes a [`PrecisionContext`] fixing the mantissa width and tolerances.

pub mod asymptotics;
pub mod elliptic;
pub mod equilibrium;
pub mod error;
pub mod hankel;
pub mod matrix2;
pub mod mc;
pub mod moments;
pub mod precision;
pub mod quad;
pub mod rh;
pub mod tolerances;

pub use asymptotics::AsymptoticReport;
pub use elliptic::CurveData;
pub use equilibrium::EquilibriumData;
pub use error::{Error, Result};
pub use hankel::{HankelFactorization, PartitionResult};
pub use matrix2::Matrix2;
pub use mc::{EstimateResult, SpectrumSample};
pub use moments::{ModelParams, MomentCache, MomentTable};
pub use precision::{PrecisionContext, Side, DEFAULT_MANTISSA_BITS};
pub use quad::{ComplexQuadrature, Endpoint, QuadratureResult};
pub use rh::RHCheckReport;
