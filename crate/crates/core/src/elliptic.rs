//! Elliptic data of the two-cut spectral curve `q^2 = (y^2-l2^2)(y^2-l3^2)`:
//! the a-period normalizer `K0`, the b-period `Pi`, the Abel map and its
//! value at infinity, the theta function, the scalar jump function `F`, and
//! the theta-function outer model matrix with its jump verification.

use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::equilibrium::{two_cut_sqrt, two_cut_sqrt_boundary, EquilibriumData};
use crate::error::{Error, Result};
use crate::matrix2::Matrix2;
use crate::precision::{cabs, decimal_string, PrecisionContext, Side};
use crate::quad::{integrate_polyline, integrate_real, Endpoint};

/// Elliptic data attached to an equilibrium configuration.
///
/// `k0` is the a-period normalizer (positive), `period` the b-period of the
/// normalized holomorphic 1-form (positive imaginary part), `xi` the jump
/// constant `-2 pi i/(K0 l2 l3)` (purely imaginary), `u_inf` the Abel map at
/// infinity (real, tends to 1/4 as `v2 -> 0`).
#[derive(Debug, Clone)]
pub struct CurveData {
    pub eq: EquilibriumData,
    pub k0: Float,
    pub xi: Complex,
    pub period: Complex,
    pub u_inf: Float,
}

impl CurveData {
    /// The half-period shift constant of the model matrix, exactly `-1/4`.
    pub fn d(&self, ctx: &PrecisionContext) -> Float {
        ctx.real(-0.25)
    }
}

/// Compute `K0`, `Pi`, `xi`, `u(inf)` from the branch points.
///
/// `K0 = 2 int_{l2}^{-l2} ds/q(s)` along the inner gap (where `q < 0`),
/// `Pi = 2 int_{l3}^{l2} dy/(K0 q_+(y))`, and
/// `u_inf = int_{l3}^inf dy/(K0 q(y))`, the tail mapped to a finite interval
/// by `s = l3/u`. The cross-identity `xi = -2 pi i/(K0 l2 l3)` (a residue
/// computation) is verified against the defining ratio of integrals.
pub fn curve_data(eq: &EquilibriumData, ctx: &PrecisionContext) -> Result<CurveData> {
    let prec = ctx.bits();
    let a2 = eq.a2();
    let a3 = eq.a3();
    let l2 = eq.lambda2().clone();
    let l3 = eq.lambda3().clone();

    // K0 = 2 int_{-l2}^{l2} ds/sqrt((A2-s^2)(A3-s^2)) > 0
    let k0 = {
        let q = integrate_real(
            |s: &Float| {
                let s2 = s.clone().square();
                let d = (a2.clone() - &s2) * (a3.clone() - s2);
                Ok(ctx.real(1) / d.sqrt())
            },
            &(-l2.clone()),
            &l2,
            [Endpoint::InverseSqrt; 2],
            ctx,
        )?;
        q.value * 2u32
    };

    // J = int_{l2}^{l3} dy/sqrt((y^2-A2)(A3-y^2)); Pi = 2i J / K0
    let period = {
        let q = integrate_real(
            |s: &Float| {
                let s2 = s.clone().square();
                let d = (s2.clone() - &a2) * (a3.clone() - s2);
                Ok(ctx.real(1) / d.sqrt())
            },
            &l2,
            &l3,
            [Endpoint::InverseSqrt; 2],
            ctx,
        )?;
        let im = q.value * 2u32 / &k0;
        Complex::with_val(prec, (&Float::new(prec), &im))
    };
    if !period.imag().is_sign_positive() || period.imag().is_zero() {
        return Err(Error::BranchConfiguration(
            "b-period does not have positive imaginary part".into(),
        ));
    }

    // xi from the residue identity, cross-checked against the ratio of
    // integrals that defines it.
    let xi = {
        let denom = (&k0 * &l2).complete(prec) * &l3;
        let im = -(ctx.pi() * 2u32) / denom;
        Complex::with_val(prec, (&Float::new(prec), &im))
    };
    {
        // J1 = int_{l2}^{l3} ds/(s sqrt((s^2-A2)(A3-s^2))); the defining
        // ratio equals -4i J1/K0 and must match the closed form.
        let j1 = integrate_real(
            |s: &Float| {
                let s2 = s.clone().square();
                let d = (s2.clone() - &a2) * (a3.clone() - s2);
                Ok(ctx.real(1) / (d.sqrt() * s))
            },
            &l2,
            &l3,
            [Endpoint::InverseSqrt; 2],
            ctx,
        )?;
        let ratio_im = -(j1.value * 4u32 / &k0);
        let rel = ((ratio_im - xi.imag()).abs() / xi.imag().clone().abs()).to_f64();
        if rel > 1e-10 {
            return Err(Error::BranchConfiguration(format!(
                "xi residue identity violated: rel {rel:.3e}"
            )));
        }
    }

    // u_inf = (1/(K0 l3)) int_0^1 du/sqrt((1-(A2/A3)u^2)(1-u^2))
    let u_inf = {
        let m = (&a2 / &a3).complete(prec);
        let q = integrate_real(
            |u: &Float| {
                let u2 = u.clone().square();
                let d = (ctx.real(1) - u2.clone() * &m) * (ctx.real(1) - u2);
                Ok(ctx.real(1) / d.sqrt())
            },
            &ctx.zero(),
            &ctx.real(1),
            [Endpoint::Regular, Endpoint::InverseSqrt],
            ctx,
        )?;
        q.value / ((&k0 * &l3).complete(prec))
    };

    Ok(CurveData {
        eq: eq.clone(),
        k0,
        xi,
        period,
        u_inf,
    })
}

// ---------------------------------------------------------------------------
// Theta function
// ---------------------------------------------------------------------------

/// `theta(s) = sum_m exp(i pi Pi m^2 + 2 pi i s m)`, truncated where the
/// geometric tail bound drops below the context tolerance.
pub fn theta(s: &Complex, period: &Complex, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    let beta = period.imag(); // Pi = alpha + i beta, beta > 0 required
    if !(beta.is_sign_positive() && !beta.is_zero()) {
        return Err(Error::ThetaDivergent);
    }
    let pi = ctx.pi();
    let i_pi_period = Complex::with_val(prec, (0, 1)) * &pi * period;
    let two_pi_i_s = Complex::with_val(prec, (0, 1)) * &pi * s * 2u32;

    let mut sum = Complex::with_val(prec, 1); // m = 0 term
    let sigma = s.imag().clone().abs();
    let mut m: u32 = 1;
    loop {
        let m2 = Float::with_val(prec, m).square();
        let quad = (&i_pi_period * &m2).complete((prec, prec));
        let lin = (&two_pi_i_s * Float::with_val(prec, m)).complete((prec, prec));
        sum += (quad.clone() + &lin).exp();
        sum += (quad - lin).exp();

        // tail bound: terms beyond M are dominated by the geometric series
        // with ratio r = exp(-pi beta (2M+1) + 2 pi |Im s|)
        let log_r = -(pi.clone() * beta * (2 * m + 1)) + pi.clone() * 2u32 * &sigma;
        if log_r < -1i32 {
            let r = log_r.exp();
            let head = (-(pi.clone() * beta) * Float::with_val(prec, m + 1).square()
                + pi.clone() * 2u32 * &sigma * Float::with_val(prec, m + 1))
            .exp();
            let tail = head * 2u32 / (ctx.real(1) - &r);
            let scale = cabs(&sum);
            if tail <= (ctx.rel_tol() * &scale).complete(prec) {
                return Ok(sum);
            }
        }
        m += 1;
        if m > 4_000_000 {
            return Err(Error::ThetaDivergent);
        }
    }
}

/// Theta of a real argument (real output for purely imaginary period).
pub fn theta_real(s: &Float, period: &Complex, ctx: &PrecisionContext) -> Result<Float> {
    let sc = Complex::with_val(ctx.bits(), (s, &Float::new(ctx.bits())));
    Ok(theta(&sc, period, ctx)?.real().clone())
}

// ---------------------------------------------------------------------------
// Abel map
// ---------------------------------------------------------------------------

fn lift_side(y: &Complex, side: Option<Side>, ctx: &PrecisionContext) -> Result<Complex> {
    if !y.imag().is_zero() {
        return Ok(y.clone());
    }
    let s = side.ok_or(Error::SideRequired)?;
    let delta = ctx.exp2(-(ctx.bits() as i32) / 4);
    let off = delta * s.sign();
    Ok(Complex::with_val(ctx.bits(), (y.real(), &off)))
}

/// Needs a side when the point lies on `[-l3, l3]` (cuts or gap).
fn needs_side(y: &Complex, eq: &EquilibriumData) -> bool {
    y.imag().is_zero() && y.real().clone().abs() <= *eq.lambda3()
}

/// Abel map `u(y) = int_{l3}^{y} dy/(K0 q)`, path inside the plane slit
/// along `(-inf, l3]`. Boundary values on the slit are taken as limits from
/// the side given.
pub fn abel_map(
    y: &Complex,
    side: Option<Side>,
    cd: &CurveData,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let prec = ctx.bits();
    let eq = &cd.eq;
    if y.imag().is_zero() && y.real() >= eq.lambda3() {
        // real ray to the right: real integrand
        if *y.real() == *eq.lambda3() {
            return Ok(Complex::new(prec));
        }
        let a2 = eq.a2();
        let a3 = eq.a3();
        let q = integrate_real(
            |s: &Float| {
                let s2 = s.clone().square();
                let d = (s2.clone() - &a2) * (s2 - &a3);
                Ok(ctx.real(1) / d.sqrt())
            },
            eq.lambda3(),
            &ctx.real(y.real()),
            [Endpoint::InverseSqrt, Endpoint::Regular],
            ctx,
        )?;
        let v = q.value / &cd.k0;
        return Ok(Complex::with_val(prec, (&v, &Float::new(prec))));
    }
    let yc = if needs_side(y, eq) {
        lift_side(y, side, ctx)?
    } else {
        y.clone()
    };
    let sigma = if yc.imag().is_sign_positive() { 1 } else { -1 };
    let height = Float::with_val(prec, sigma);
    let pts = vec![
        Complex::with_val(prec, (eq.lambda3(), &Float::new(prec))),
        Complex::with_val(prec, (eq.lambda3(), &height)),
        Complex::with_val(prec, (yc.real(), &height)),
        yc.clone(),
    ];
    let q = integrate_polyline(
        |s: &Complex| Ok(two_cut_sqrt(s, eq)?.recip()),
        &pts,
        Endpoint::InverseSqrt,
        Endpoint::Regular,
        ctx,
    )?;
    Ok(q.value / &cd.k0)
}

// ---------------------------------------------------------------------------
// The scalar function F
// ---------------------------------------------------------------------------

/// `F(y) = (v1 q(y)/(2 pi i)) (int_Sigma ds/(s q_+(s)(s-y))
///                             + xi int_{-l2}^{l2} ds/(q(s)(s-y)))`.
///
/// Solves the scalar jump problem `F_+ + F_- = v1/y` on the support,
/// `F_+ - F_- = xi v1` on the gap, `F = O(1/y)` at infinity, bounded at the
/// branch points.
pub fn f_value(
    y: &Complex,
    side: Option<Side>,
    v1: &Float,
    cd: &CurveData,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let prec = ctx.bits();
    let eq = &cd.eq;
    if v1.is_zero() {
        return Ok(Complex::new(prec));
    }
    let yc = if needs_side(y, eq) {
        lift_side(y, side, ctx)?
    } else {
        y.clone()
    };

    let cut_integral = |a: &Float, b: &Float| -> Result<Complex> {
        integrate_real_complex(
            |s: &Float| {
                let q = two_cut_sqrt_boundary(s, Side::Plus, eq)?;
                let den = (Complex::with_val(prec, s) - &yc) * q * Complex::with_val(prec, s);
                Ok(den.recip())
            },
            a,
            b,
            [Endpoint::InverseSqrt; 2],
            ctx,
        )
    };
    let i1 = cut_integral(&(-eq.lambda3().clone()), &(-eq.lambda2().clone()))?
        + cut_integral(eq.lambda2(), eq.lambda3())?;

    let i2 = integrate_real_complex(
        |s: &Float| {
            let q = two_cut_sqrt_boundary(s, Side::Plus, eq)?; // gap: real value
            let den = (Complex::with_val(prec, s) - &yc) * q;
            Ok(den.recip())
        },
        &(-eq.lambda2().clone()),
        eq.lambda2(),
        [Endpoint::InverseSqrt; 2],
        ctx,
    )?;

    let q_y = two_cut_sqrt(&yc, eq)?;
    let two_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * 2u32;
    let combo = i1 + (&cd.xi * &i2).complete((prec, prec));
    Ok(q_y * v1 * combo / two_pi_i)
}

/// Real-interval quadrature of a complex-valued integrand.
fn integrate_real_complex<F>(
    f: F,
    a: &Float,
    b: &Float,
    endpoints: [Endpoint; 2],
    ctx: &PrecisionContext,
) -> Result<Complex>
where
    F: Fn(&Float) -> Result<Complex>,
{
    let za = Complex::with_val(ctx.bits(), (a, &Float::new(ctx.bits())));
    let zb = Complex::with_val(ctx.bits(), (b, &Float::new(ctx.bits())));
    let q = crate::quad::integrate_segment(
        |z: &Complex| f(&ctx.real(z.real())),
        &za,
        &zb,
        endpoints,
        ctx,
    )?;
    Ok(q.value)
}

// ---------------------------------------------------------------------------
// Outer model matrix
// ---------------------------------------------------------------------------

/// The quarter-root ratio `gamma(y)`, individual factor arguments in
/// `(-pi, pi]`.
fn gamma_factor(y: &Complex, eq: &EquilibriumData, ctx: &PrecisionContext) -> Complex {
    let prec = ctx.bits();
    let p = (prec, prec);
    let l2 = Complex::with_val(prec, eq.lambda2());
    let l3 = Complex::with_val(prec, eq.lambda3());
    let ln = (y - &l2).complete(p).ln() + (y + &l3).complete(p).ln()
        - (y + &l2).complete(p).ln()
        - (y - &l3).complete(p).ln();
    (ln / 4u32).exp()
}

/// Abel-map value and quarter-root prefactors at one point: the expensive,
/// `(N, v1)`-independent half of the model matrix.
#[derive(Debug, Clone)]
pub struct OuterPoint {
    pub u: Complex,
    /// `(gamma + 1/gamma)/2`
    pub a: Complex,
    /// `(gamma - 1/gamma)/(2i)`
    pub b: Complex,
}

/// Evaluate the point data; `yc` must already be off the cuts (lifted).
pub fn outer_point(yc: &Complex, cd: &CurveData, ctx: &PrecisionContext) -> Result<OuterPoint> {
    let prec = ctx.bits();
    let u = abel_map(yc, None, cd, ctx)?;
    let gamma = gamma_factor(yc, &cd.eq, ctx);
    let gamma_inv = gamma.clone().recip();
    let two_i = Complex::with_val(prec, (0, 2));
    let a = (gamma.clone() + &gamma_inv) / 2u32;
    let b = (gamma - gamma_inv) / two_i;
    Ok(OuterPoint { u, a, b })
}

/// Assemble the model matrix from precomputed point data.
pub fn assemble_outer(
    pt: &OuterPoint,
    n: usize,
    v1: &Float,
    cd: &CurveData,
    ctx: &PrecisionContext,
) -> Result<Matrix2> {
    let prec = ctx.bits();
    let eq = &cd.eq;
    let u = &pt.u;

    // kappa = N/2 + v1 xi/(2 pi i) = N/2 - v1/(K0 l2 l3), a real shift
    let kappa = {
        let den = (&cd.k0 * eq.lambda2()).complete(prec) * eq.lambda3();
        ctx.real(n as u32) / 2u32 - v1.clone() / den
    };
    let kappa_c = Complex::with_val(prec, (&kappa, &Float::new(prec)));
    let d_c = Complex::with_val(prec, (&cd.d(ctx), &Float::new(prec)));

    let th = |arg: Complex| -> Result<Complex> { theta(&arg, &cd.period, ctx) };
    let quot = |num: Complex, den: Complex, tag: &'static str| -> Result<Complex> {
        let dv = th(den)?;
        if cabs(&dv).is_zero() {
            return Err(Error::ThetaZero { factor: tag });
        }
        Ok(th(num)? / dv)
    };

    let p = (prec, prec);
    let n1 = quot(
        (u - &kappa_c).complete(p) + &d_c,
        (u + &d_c).complete(p),
        "theta(u + d)",
    )?;
    let n2 = quot(
        (-u.clone() - &kappa_c) + &d_c,
        (-u.clone()) + &d_c,
        "theta(-u + d)",
    )?;
    let m1 = quot(
        (u - &kappa_c).complete(p) - &d_c,
        (u - &d_c).complete(p),
        "theta(u - d)",
    )?;
    let m2 = quot(
        (-u.clone() - &kappa_c) - &d_c,
        (-u.clone()) - &d_c,
        "theta(-u - d)",
    )?;

    // normalizer: value of the raw matrix at infinity inverted
    let u_inf_c = Complex::with_val(prec, (&cd.u_inf, &Float::new(prec)));
    let n1_inf = quot(
        (&u_inf_c - &kappa_c).complete(p) + &d_c,
        (&u_inf_c + &d_c).complete(p),
        "theta(u_inf + d)",
    )?;
    let m2_inf = quot(
        (-u_inf_c.clone() - &kappa_c) - &d_c,
        (-u_inf_c.clone()) - &d_c,
        "theta(-u_inf - d)",
    )?;

    Ok(Matrix2::new(
        (pt.a.clone() * n1) / &n1_inf,
        (-pt.b.clone() * n2) / &m2_inf,
        (pt.b.clone() * m1) / &n1_inf,
        (pt.a.clone() * m2) / &m2_inf,
    ))
}

/// Outer model matrix `S_inf(y)`: theta-quotient entries with the
/// quarter-root prefactors, normalized to the identity at infinity.
///
/// `kappa = N/2 + v1 xi/(2 pi i)` is real; `d = -1/4`.
pub fn outer_parametrix(
    y: &Complex,
    side: Option<Side>,
    n: usize,
    v1: &Float,
    cd: &CurveData,
    ctx: &PrecisionContext,
) -> Result<Matrix2> {
    let prec = ctx.bits();
    let eq = &cd.eq;

    // branch-point exclusion margin
    let margin = (eq.lambda2().clone() * ctx.real(1e-6)).max(&ctx.exp2(-(prec as i32)));
    for bp in [
        eq.lambda2().clone(),
        eq.lambda3().clone(),
        -eq.lambda2().clone(),
        -eq.lambda3().clone(),
    ] {
        let d = cabs(&(y.clone() - Complex::with_val(prec, &bp)));
        if d < margin {
            return Err(Error::Domain(
                "evaluation point too close to a branch point".into(),
            ));
        }
    }

    let yc = if needs_side(y, eq) {
        lift_side(y, side, ctx)?
    } else {
        y.clone()
    };
    let pt = outer_point(&yc, cd, ctx)?;
    assemble_outer(&pt, n, v1, cd, ctx)
}

/// Jump matrix of the outer model on the inner gap:
/// `diag(exp(N pi i + xi v1), exp(-N pi i - xi v1))`.
pub fn gap_jump(n: usize, v1: &Float, cd: &CurveData, ctx: &PrecisionContext) -> Matrix2 {
    let prec = ctx.bits();
    let p = (prec, prec);
    let n_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * Float::with_val(prec, n as u32);
    let arg = n_pi_i + (&cd.xi * v1).complete(p);
    Matrix2::diag(arg.clone().exp(), (-arg).exp())
}

/// Jump matrix on the support intervals: `(0, 1; -1, 0)`.
pub fn cut_jump(prec: u32) -> Matrix2 {
    Matrix2::new(
        Complex::new(prec),
        Complex::with_val(prec, 1),
        Complex::with_val(prec, -1),
        Complex::new(prec),
    )
}

/// Verification report for the outer model matrix.
#[derive(Debug, Clone)]
pub struct OuterReport {
    pub n: usize,
    pub v1: Float,
    pub v2: Float,
    pub jump_residual_gap: Float,
    pub jump_residual_cuts: Float,
    pub det_residual: Float,
    pub decay_ratio: Float,
    pub grid: usize,
}

impl OuterReport {
    pub fn all_passed(&self, jump_tol: f64, det_tol: f64, decay_slack: f64) -> bool {
        self.jump_residual_gap.to_f64() < jump_tol
            && self.jump_residual_cuts.to_f64() < jump_tol
            && self.det_residual.to_f64() < det_tol
            && (self.decay_ratio.to_f64() - 10.0).abs() <= 10.0 * decay_slack
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "v1": decimal_string(&self.v1),
            "v2": decimal_string(&self.v2),
            "residuals": {
                "gap_jump": decimal_string(&self.jump_residual_gap),
                "cut_jump": decimal_string(&self.jump_residual_cuts),
                "det_minus_one": decimal_string(&self.det_residual),
            },
            "decay_ratio_1e3_to_1e4": decimal_string(&self.decay_ratio),
            "grid": self.grid,
        })
    }
}

/// Verify the model-matrix jumps on both cut types, the unit determinant,
/// and the identity normalization at infinity.
pub fn verify_outer(
    n: usize,
    v1: &Float,
    cd: &CurveData,
    grid: usize,
    ctx: &PrecisionContext,
) -> Result<OuterReport> {
    let mut reports = verify_outer_multi(&[(n, v1.clone())], cd, grid, ctx)?;
    Ok(reports.pop().unwrap())
}

/// Run the jump/determinant/decay verification for several `(N, v1)`
/// configurations at once; the Abel map and quarter-root data per grid point
/// are computed a single time and shared.
pub fn verify_outer_multi(
    configs: &[(usize, Float)],
    cd: &CurveData,
    grid: usize,
    ctx: &PrecisionContext,
) -> Result<Vec<OuterReport>> {
    let prec = ctx.bits();
    let eq = &cd.eq;
    let margin = eq.lambda2().clone() * ctx.real(1e-3);

    let sample = |a: &Float, b: &Float, k: usize| -> Float {
        let frac = ctx.real((k + 1) as u32) / ctx.real((grid + 1) as u32);
        a.clone() + (b.clone() - a) * frac
    };

    // region 0: the inner gap; regions 1, 2: the support intervals
    let mut point_pairs: Vec<(usize, OuterPoint, OuterPoint)> = Vec::new();
    for region in 0..3usize {
        let (a, b) = match region {
            0 => {
                let b = eq.lambda2().clone() - &margin;
                (-b.clone(), b)
            }
            1 => (
                -eq.lambda3().clone() + &margin,
                -eq.lambda2().clone() - &margin,
            ),
            _ => (
                eq.lambda2().clone() + &margin,
                eq.lambda3().clone() - &margin,
            ),
        };
        for k in 0..grid {
            let x = sample(&a, &b, k);
            let xc = Complex::with_val(prec, (&x, &Float::new(prec)));
            let up = lift_side(&xc, Some(Side::Plus), ctx)?;
            let dn = lift_side(&xc, Some(Side::Minus), ctx)?;
            point_pairs.push((
                region,
                outer_point(&up, cd, ctx)?,
                outer_point(&dn, cd, ctx)?,
            ));
        }
    }
    let far3 = outer_point(&Complex::with_val(prec, (0, 1e3)), cd, ctx)?;
    let far4 = outer_point(&Complex::with_val(prec, (0, 1e4)), cd, ctx)?;
    let generic = outer_point(&Complex::with_val(prec, (1, 1)), cd, ctx)?;

    let mut out = Vec::with_capacity(configs.len());
    for (n, v1) in configs {
        let j_gap = gap_jump(*n, v1, cd, ctx);
        let j_cut = cut_jump(prec);
        let mut jump_gap = ctx.zero();
        let mut jump_cuts = ctx.zero();
        let mut det_res = ctx.zero();
        for (region, up, dn) in &point_pairs {
            let sp = assemble_outer(up, *n, v1, cd, ctx)?;
            let sm = assemble_outer(dn, *n, v1, cd, ctx)?;
            let j = if *region == 0 { &j_gap } else { &j_cut };
            let r = sp.sub(&sm.mul(j)).max_norm();
            if *region == 0 {
                if r > jump_gap {
                    jump_gap = r;
                }
            } else if r > jump_cuts {
                jump_cuts = r;
            }
            let d = cabs(&(sp.det() - 1u32));
            if d > det_res {
                det_res = d;
            }
        }
        let d3 = assemble_outer(&far3, *n, v1, cd, ctx)?
            .sub(&Matrix2::identity(prec))
            .max_norm();
        let d4 = assemble_outer(&far4, *n, v1, cd, ctx)?
            .sub(&Matrix2::identity(prec))
            .max_norm();
        let decay_ratio = d3 / d4;
        let d = cabs(&(assemble_outer(&generic, *n, v1, cd, ctx)?.det() - 1u32));
        if d > det_res {
            det_res = d;
        }
        out.push(OuterReport {
            n: *n,
            v1: v1.clone(),
            v2: eq.v2().clone(),
            jump_residual_gap: jump_gap,
            jump_residual_cuts: jump_cuts,
            det_residual: det_res,
            decay_ratio,
            grid,
        });
    }
    Ok(out)
}
