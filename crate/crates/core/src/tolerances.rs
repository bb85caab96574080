//! Centralized acceptance thresholds.
//!
//! Every verification suite and the acceptance tests read their tolerances
//! from here; no ad-hoc magic numbers at call sites.

/// Closed-form exactness of `E_1`, `E_2` at 512 bits.
pub const CLOSED_FORM_REL: f64 = 1e-20;

/// Gaussian degeneration `E_N(0,0) = 1` for `N <= 30`.
pub const GAUSSIAN_DEGENERATION_REL: f64 = 1e-25;

/// Determinant vs. norm-product identity at `N = 10`, 512 bits.
pub const DET_PRODUCT_REL: f64 = 1e-20;

/// Parity `E_N(z,t) = E_N(z,-t)` at `N = 8`.
pub const PARITY_REL: f64 = 1e-20;

/// Even moments vs. the half-integer Bessel closed form, in units of the
/// quadrature tolerance.
pub const MOMENT_ORACLE_FACTOR: f64 = 10.0;

/// Contour differential identities vs. finite differences of `log G_N`.
pub const DIFFID_REL: f64 = 1e-5;

/// Branch-point constraint residuals are measured against `2^-(bits/2)`:
/// the check lives in `solve_branch_points`; this is the looser reporting
/// threshold used by the verification suites (`1e-40` at 512 bits).
pub const BRANCH_RESIDUAL: f64 = 1e-40;

/// g-function jump residuals on 50-point grids.
pub const G_JUMP_RESIDUAL: f64 = 1e-8;

/// Outer model matrix: jump residuals on both cut types.
pub const OUTER_JUMP_RESIDUAL: f64 = 1e-8;

/// Outer model matrix: `|det - 1|`.
pub const OUTER_DET_RESIDUAL: f64 = 1e-10;

/// Identity-at-infinity decay ratio between `R = 1e3` and `1e4` is 10 within
/// this relative slack.
pub const OUTER_DECAY_SLACK: f64 = 0.2;

/// Final `|ratio - 1|` of exact over predicted at `N = 64, z = 1, t = 0.5`.
pub const TREND_FINAL: f64 = 0.25;

/// Taylor-coefficient ratio vs. its leading-order prediction at `N = 16`.
pub const COROLLARY_REL: f64 = 0.25;

/// Small-`v2` spot checks at `v2 = 1e-6`.
pub const SMALL_V2_SPOT: f64 = 1e-2;

/// Monte Carlo agreement with the exact route, in standard errors.
pub const MC_SIGMAS: f64 = 3.0;

/// Repulsion-statistic sanity `M_{1,1} = M_{1,2} = 1`.
pub const QMOMENT_ABS: f64 = 1e-6;

/// `det Y - 1` residual for the finite-N Riemann-Hilbert solution.
pub const RH_DET_RESIDUAL: f64 = 1e-10;

/// Y-jump residual across the real axis.
pub const RH_JUMP_RESIDUAL: f64 = 1e-8;

/// Kernel: sum route vs. Christoffel-Darboux route.
pub const KERNEL_ROUTE_DIFF: f64 = 1e-8;

/// Grid size for the g-function and outer-matrix verification suites.
pub const VERIFY_GRID: usize = 50;
