//! Equilibrium measure of the rescaled potential `V0(y) = v2/(2y^2) + y^2/2`.
//!
//! The support is two symmetric intervals `[-l3, -l2] u [l2, l3]`; the
//! branch points come from a quartic for `A1 = lambda1^2` and a quadratic for
//! `A2, A3`, the Lagrange constant from a certified large-`Y` limit, and the
//! whole construction is verified numerically: the Euler-Lagrange equality on
//! the support, the log-jump constants off it, and strict inequality in the
//! complement.

use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::{cabs, decimal_string, find_root_bracketed, PrecisionContext, Side};
use crate::quad::{integrate_polyline, integrate_real, Endpoint};

/// Branch points and Lagrange constant of the two-cut equilibrium problem.
///
/// `lambda1 = i * lambda1_im` is purely imaginary; `0 < lambda2 < lambda3`.
#[derive(Debug, Clone)]
pub struct EquilibriumData {
    v2: Float,
    a1: Float,
    lambda1_im: Float,
    lambda2: Float,
    lambda3: Float,
    l: Option<Float>,
}

impl EquilibriumData {
    pub fn v2(&self) -> &Float {
        &self.v2
    }

    /// `A1 = lambda1^2`, a negative real in `(-sqrt(v2), 0)`.
    pub fn a1(&self) -> &Float {
        &self.a1
    }

    pub fn a2(&self) -> Float {
        self.lambda2.clone().square()
    }

    pub fn a3(&self) -> Float {
        self.lambda3.clone().square()
    }

    pub fn lambda1(&self) -> Complex {
        let p = self.lambda1_im.prec();
        Complex::with_val(p, (&Float::new(p), &self.lambda1_im))
    }

    pub fn lambda1_im(&self) -> &Float {
        &self.lambda1_im
    }

    pub fn lambda2(&self) -> &Float {
        &self.lambda2
    }

    pub fn lambda3(&self) -> &Float {
        &self.lambda3
    }

    pub fn l(&self) -> Result<&Float> {
        self.l
            .as_ref()
            .ok_or_else(|| Error::Domain("Lagrange constant not computed yet".into()))
    }

    /// Residuals of the three branch-point constraints, scaled by the natural
    /// size of each equation.
    pub fn constraint_residuals(&self, ctx: &PrecisionContext) -> [Float; 3] {
        let prec = ctx.bits();
        let a2 = self.a2();
        let a3 = self.a3();
        // A1 + (A2 + A3)/2 = 2
        let r1 = (self.a1.clone() + (&a2 + &a3).complete(prec) / 2u32 - 2u32).abs() / 2u32;
        // 1/A1 + (1/A2 + 1/A3)/2 = 0, scaled by 1/|A1|
        let inv = |x: &Float| ctx.real(1) / x;
        let r2 = ((inv(&self.a1) + (inv(&a2) + inv(&a3)) / 2u32) * self.a1.clone().abs()).abs();
        // lambda1^2 lambda2 lambda3 = -v2, scaled by v2
        let r3 = (((&self.a1 * &self.lambda2).complete(prec) * &self.lambda3 + &self.v2)
            / &self.v2)
            .abs();
        [r1, r2, r3]
    }
}

/// Solve the branch-point system for a given `v2 > 0`.
///
/// `A1` is the root of `A^4 - 2A^3 - v2^2` bracketed in `(-sqrt(v2), 0)`;
/// `A2 <= A3` solve `y^2 - 2(2 - A1) y + v2^2/A1^2 = 0` (computed without
/// cancellation), and the lambdas are the square roots with Im(lambda1) > 0,
/// `0 < lambda2 < lambda3`.
pub fn solve_branch_points(v2: &Float, ctx: &PrecisionContext) -> Result<EquilibriumData> {
    if !(v2.is_sign_positive() && !v2.is_zero()) {
        return Err(Error::Domain("v2 must be positive".into()));
    }
    let prec = ctx.bits();
    let v2 = ctx.real(v2);
    let v2sq = v2.clone().square();

    let quartic = |a: &Float| -> Float {
        let a2 = a.clone().square();
        let a3 = (&a2 * a).complete(prec);
        a2.square() - a3 * 2u32 - &v2sq
    };
    let root_ctx = ctx.clone().with_rel_tol(ctx.exp2(16 - ctx.bits() as i32));
    let lo = -v2.clone().sqrt();
    let a1 = find_root_bracketed(quartic, &lo, &ctx.zero(), &root_ctx)?;

    // A2 A3 = v2^2/A1^2 and A2 + A3 = 2(2 - A1); larger root first, smaller
    // by the product to avoid cancellation.
    let sum = (ctx.real(2) - &a1) * 2u32;
    let product = v2sq.clone() / a1.clone().square();
    let disc = (sum.clone().square() - product.clone() * 4u32).sqrt();
    let a3 = (sum + disc) / 2u32;
    let a2 = (&product / &a3).complete(prec);
    if !(a2.is_sign_positive() && a3.is_sign_positive()) {
        return Err(Error::BranchConfiguration(
            "quadratic roots for A2, A3 are not positive".into(),
        ));
    }

    let eq = EquilibriumData {
        v2,
        lambda1_im: (-a1.clone()).sqrt(),
        a1,
        lambda2: a2.sqrt(),
        lambda3: a3.sqrt(),
        l: None,
    };
    let res = eq.constraint_residuals(ctx);
    let tol = ctx.exp2(-((ctx.bits() / 2) as i32));
    for (i, r) in res.iter().enumerate() {
        if !(r.clone() <= tol) {
            return Err(Error::BranchConfiguration(format!(
                "constraint {i} residual {} above 2^-{}",
                r.to_f64(),
                ctx.bits() / 2
            )));
        }
    }
    Ok(eq)
}

// ---------------------------------------------------------------------------
// The two-sheeted square root and the density factor nu
// ---------------------------------------------------------------------------

/// `R(y) = sqrt(y^2 - A2) * sqrt(y^2 - A3)` with principal square roots of
/// each factor; analytic on the plane cut along the two support intervals,
/// even in `y`, and `R ~ y^2` at infinity. Requires `y` off the cuts.
pub fn two_cut_sqrt(y: &Complex, eq: &EquilibriumData) -> Result<Complex> {
    let prec = y.prec().0;
    if y.imag().is_zero() {
        let x = y.real();
        let ax = x.clone().abs();
        if ax >= eq.lambda2 && ax <= eq.lambda3 {
            return Err(Error::SideRequired);
        }
        let re = two_cut_sqrt_real_axis(x, eq);
        return Ok(Complex::with_val(prec, (&re, &Float::new(prec))));
    }
    let y2 = y.clone().square();
    let f1 = (y2.clone() - Complex::with_val(prec, &eq.a2())).sqrt();
    let f2 = (y2 - Complex::with_val(prec, &eq.a3())).sqrt();
    Ok(f1 * f2)
}

/// `R` on the real axis away from the cuts: positive beyond `+-lambda3`,
/// negative on the inner gap.
fn two_cut_sqrt_real_axis(x: &Float, eq: &EquilibriumData) -> Float {
    let prec = x.prec();
    let x2 = x.clone().square();
    let a2 = eq.a2();
    let a3 = eq.a3();
    if x2 > a3 {
        ((&x2 - &a2).complete(prec) * (x2.clone() - &a3)).sqrt()
    } else {
        -(((&a2 - &x2).complete(prec)) * (a3 - x2)).sqrt()
    }
}

/// Boundary value of `R` on the cuts: `+- i sign(y) sqrt((y^2-A2)(A3-y^2))`.
pub fn two_cut_sqrt_boundary(y: &Float, side: Side, eq: &EquilibriumData) -> Result<Complex> {
    let prec = y.prec();
    let ay = y.clone().abs();
    if !(ay >= eq.lambda2 && ay <= eq.lambda3) {
        // not on a cut: the one-sided value is just the two-sided one
        let re = two_cut_sqrt_real_axis(y, eq);
        return Ok(Complex::with_val(prec, (&re, &Float::new(prec))));
    }
    let y2 = y.clone().square();
    let mag = ((&y2 - &eq.a2()).complete(prec) * (eq.a3() - y2)).sqrt();
    let sgn = side.sign() * if y.is_sign_positive() { 1 } else { -1 };
    Ok(Complex::with_val(prec, (&Float::new(prec), &(mag * sgn))))
}

/// The density factor `nu(y) = (y^2 - lambda1^2) R(y) / (2 y^3)`.
///
/// With the branch of `R` above, `nu(y) = y/2 - 1/y + O(y^-3)` at infinity
/// (so that `g'(y) = V0'(y)/2 - nu(y) ~ 1/y`), `nu` is odd, and its sign on
/// the real axis alternates as `-, +, cut, -, cut, +` across
/// `-lambda3, -lambda2, 0, lambda2, lambda3`.
pub fn nu_value(y: &Complex, eq: &EquilibriumData) -> Result<Complex> {
    if y.real().is_zero() && y.imag().is_zero() {
        return Err(Error::Domain("nu has a pole at y = 0".into()));
    }
    let prec = y.prec().0;
    let r = two_cut_sqrt(y, eq)?;
    let y2 = y.clone().square();
    let y3 = (&y2 * y).complete((prec, prec));
    let num = (y2 - Complex::with_val(prec, eq.a1())) * r;
    Ok(num / (y3 * 2u32))
}

/// Boundary value of `nu` on the cuts.
pub fn nu_boundary(y: &Float, side: Side, eq: &EquilibriumData) -> Result<Complex> {
    if y.is_zero() {
        return Err(Error::Domain("nu has a pole at y = 0".into()));
    }
    let prec = y.prec();
    let r = two_cut_sqrt_boundary(y, side, eq)?;
    let y2 = y.clone().square();
    let y3 = (&y2 * y).complete(prec);
    let num = Complex::with_val(prec, (&(y2 - eq.a1()), &Float::new(prec)));
    Ok(num * r / (Complex::with_val(prec, &y3) * 2u32))
}

// ---------------------------------------------------------------------------
// g-tilde, the Lagrange constant, and g
// ---------------------------------------------------------------------------

/// Rectangle detour from `lambda3` to `y` through the half plane picked by
/// `sigma`, staying inside the plane slit along `(-inf, lambda3]` and away
/// from the pole at the origin.
fn detour_points(y: &Complex, sigma: i32, eq: &EquilibriumData, prec: u32) -> Vec<Complex> {
    let height = Float::with_val(prec, sigma);
    let start = Complex::with_val(prec, (&eq.lambda3, &Float::new(prec)));
    let c1 = Complex::with_val(prec, (&eq.lambda3, &height));
    let c2 = Complex::with_val(prec, (y.real(), &height));
    vec![start, c1, c2, y.clone()]
}

/// `g_tilde(y) = integral of nu from lambda3 to y`, the integration path not
/// touching `(-inf, lambda3)`. For real `y` inside the slit the side picks
/// the boundary value.
pub fn g_tilde(
    y: &Complex,
    side: Option<Side>,
    eq: &EquilibriumData,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let prec = ctx.bits();
    if y.real().is_zero() && y.imag().is_zero() {
        return Err(Error::Domain("g_tilde is singular at y = 0".into()));
    }
    let on_axis = y.imag().is_zero();
    if on_axis && *y.real() == eq.lambda3 {
        // empty integration path
        return Ok(Complex::new(prec));
    }
    if on_axis && y.real() > &eq.lambda3 {
        // plain real-line integral
        let q = integrate_real(
            |s: &Float| {
                let num = (s.clone().square() - eq.a1()) * two_cut_sqrt_real_axis(s, eq);
                let den = s.clone().square() * s * 2u32;
                Ok(num / den)
            },
            &eq.lambda3.clone(),
            &ctx.real(y.real()),
            [Endpoint::InverseSqrt, Endpoint::Regular],
            ctx,
        )?;
        return Ok(Complex::with_val(prec, (&q.value, &Float::new(prec))));
    }
    let sigma = if on_axis {
        side.ok_or(Error::SideRequired)?.sign()
    } else if y.imag().is_sign_positive() {
        1
    } else {
        -1
    };
    let pts = detour_points(y, sigma, eq, prec);
    let q = integrate_polyline(
        |s: &Complex| nu_value(s, eq),
        &pts,
        Endpoint::InverseSqrt,
        Endpoint::Regular,
        ctx,
    )?;
    Ok(q.value)
}

/// `V0(y) = v2/(2y^2) + y^2/2`.
pub fn v0_potential(y: &Complex, v2: &Float) -> Complex {
    let prec = y.prec().0;
    let p = (prec, prec);
    let y2 = y.clone().square();
    let first = Complex::with_val(prec, v2) / (&y2 * 2u32).complete(p);
    first + y2 / 2u32
}

/// Lagrange constant
/// `l = -2 lim_Y (V0(Y)/2 - log Y - g_tilde(Y))`,
/// computed at two radii with Richardson extrapolation in `1/Y^2` (the
/// expansion of the bracket is even in `1/Y`) and certified by agreement of
/// two independent radius pairs.
pub fn lagrange_l(eq: &mut EquilibriumData, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.bits();
    let truncated = |big_y: &Float| -> Result<Float> {
        let yc = Complex::with_val(prec, (big_y, &Float::new(prec)));
        let gt = g_tilde(&yc, None, eq, ctx)?;
        let v = v0_potential(&yc, &eq.v2);
        let bracket = v.real().clone() / 2u32 - big_y.clone().ln() - gt.real();
        Ok(bracket * -2i32)
    };
    let extrapolate = |y1: &Float| -> Result<Float> {
        let l1 = truncated(y1)?;
        let l2 = truncated(&(y1.clone() * 2u32))?;
        // l(Y) = l + c/Y^2: eliminate the quadratic term
        Ok((l2 * 4u32 - l1) / 3u32)
    };
    let first = extrapolate(&ctx.real(1000))?;
    let second = extrapolate(&ctx.real(10000))?;
    let diff = (&first - &second).complete(prec).abs();
    let scale = second.clone().abs().max(&ctx.real(1));
    if diff / scale > ctx.real(1e-12) {
        return Err(Error::RaisePrecision {
            detail: "Lagrange-constant extrapolations at Y = 1e3 and 1e4 disagree".into(),
        });
    }
    eq.l = Some(second.clone());
    Ok(second)
}

/// `g(y) = V0(y)/2 - g_tilde(y) + l/2`, analytic off `(-inf, lambda3]`,
/// `g(y) ~ log y` at infinity.
pub fn g_value(
    y: &Complex,
    side: Option<Side>,
    eq: &EquilibriumData,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let l = eq.l()?;
    let prec = ctx.bits();
    let gt = g_tilde(y, side, eq, ctx)?;
    let v = v0_potential(y, &eq.v2);
    let half_l = Complex::with_val(prec, (&(l.clone() / 2u32), &Float::new(prec)));
    Ok(v / 2u32 - gt + half_l)
}

// ---------------------------------------------------------------------------
// Verification report
// ---------------------------------------------------------------------------

/// Maximal residuals of the Euler-Lagrange conditions and jump constants,
/// plus the strict-inequality margin off the support (negative = satisfied).
#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub v2: Float,
    pub lambda: [Float; 3],
    pub l: Float,
    pub residual_support: Float,
    pub residual_far_left_jump: Float,
    pub residual_gap_jump: Float,
    pub inequality_margin_max: Float,
    pub grid: usize,
}

impl EquilibriumReport {
    pub fn all_passed(&self, residual_tol: f64) -> bool {
        self.residual_support.to_f64() < residual_tol
            && self.residual_far_left_jump.to_f64() < residual_tol
            && self.residual_gap_jump.to_f64() < residual_tol
            && self.inequality_margin_max.is_sign_negative()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "v2": decimal_string(&self.v2),
            "lambda": [
                format!("{}i", decimal_string(&self.lambda[0])),
                decimal_string(&self.lambda[1]),
                decimal_string(&self.lambda[2]),
            ],
            "l": decimal_string(&self.l),
            "residuals": {
                "support_equality": decimal_string(&self.residual_support),
                "far_left_jump": decimal_string(&self.residual_far_left_jump),
                "gap_jump": decimal_string(&self.residual_gap_jump),
            },
            "margins": {
                "off_support_max": decimal_string(&self.inequality_margin_max),
            },
            "grid": self.grid,
        })
    }
}

/// Verify the defining conditions of `g` on grids of the given size:
/// equality on the support, jump `2 pi i` left of it, jump `pi i` on the
/// inner gap, and strict negativity off the support. Endpoint neighborhoods
/// of relative width `1e-3` are excluded (equality is attained there).
pub fn verify_equilibrium(
    eq: &EquilibriumData,
    grid: usize,
    ctx: &PrecisionContext,
) -> Result<EquilibriumReport> {
    let prec = ctx.bits();
    let l = eq.l()?.clone();
    let margin = (eq.lambda2.clone() * ctx.real(1e-3)).max(&ctx.real(1e-9));

    let mut residual_support = ctx.zero();
    let mut residual_far_left = ctx.zero();
    let mut residual_gap = ctx.zero();
    let mut margin_max = ctx.real(-1e30);

    let lift = |x: &Float| Complex::with_val(prec, (x, &Float::new(prec)));
    let pi_i = Complex::with_val(prec, (&Float::new(prec), &ctx.pi()));

    let sample = |a: &Float, b: &Float, k: usize, n: usize| -> Float {
        // interior nodes only
        let frac = ctx.real((k + 1) as u32) / ctx.real((n + 1) as u32);
        a.clone() + (b.clone() - a) * frac
    };

    // (i) equality on both support intervals
    for cut in 0..2 {
        let (a, b) = if cut == 0 {
            (
                (-eq.lambda3.clone()) + &margin,
                (-eq.lambda2.clone()) - &margin,
            )
        } else {
            (eq.lambda2.clone() + &margin, eq.lambda3.clone() - &margin)
        };
        for k in 0..grid {
            let x = sample(&a, &b, k, grid);
            let xc = lift(&x);
            let gp = g_value(&xc, Some(Side::Plus), eq, ctx)?;
            let gm = g_value(&xc, Some(Side::Minus), eq, ctx)?;
            let v = v0_potential(&xc, &eq.v2);
            let r = cabs(&(gp + gm - v - lift(&l)));
            if r > residual_support {
                residual_support = r;
            }
        }
    }

    // (ii) jump 2 pi i on (-inf, -lambda3), sampled on a finite window
    {
        let a = -eq.lambda3.clone() - 4u32;
        let b = (-eq.lambda3.clone()) - &margin;
        for k in 0..grid {
            let x = sample(&a, &b, k, grid);
            let xc = lift(&x);
            let gp = g_value(&xc, Some(Side::Plus), eq, ctx)?;
            let gm = g_value(&xc, Some(Side::Minus), eq, ctx)?;
            let r = cabs(&(gp - gm - pi_i.clone() * 2u32));
            if r > residual_far_left {
                residual_far_left = r;
            }
        }
    }

    // (iii) jump pi i on the inner gap, origin excluded
    {
        let b = eq.lambda2.clone() - &margin;
        for k in 0..grid {
            let x = sample(&(b.clone() * -1i32), &b, k, grid);
            if x.clone().abs() < eq.lambda2.clone() * ctx.real(1e-2) {
                continue;
            }
            let xc = lift(&x);
            let gp = g_value(&xc, Some(Side::Plus), eq, ctx)?;
            let gm = g_value(&xc, Some(Side::Minus), eq, ctx)?;
            let r = cabs(&(gp - gm - pi_i.clone()));
            if r > residual_gap {
                residual_gap = r;
            }
        }
    }

    // (iv) strict negativity of Re(g_+ + g_-) - V0 - l off the support
    {
        let mut points: Vec<Float> = Vec::new();
        let gap_b = eq.lambda2.clone() - &margin;
        for k in 0..grid {
            let x = sample(&(gap_b.clone() * -1i32), &gap_b, k, grid);
            if x.clone().abs() > eq.lambda2.clone() * ctx.real(1e-2) {
                points.push(x);
            }
        }
        let right_a = eq.lambda3.clone() + &margin;
        let right_b = eq.lambda3.clone() + 4u32;
        for k in 0..grid {
            points.push(sample(&right_a, &right_b, k, grid));
            points.push(-sample(&right_a, &right_b, k, grid));
        }
        for x in points {
            let xc = lift(&x);
            let gp = g_value(&xc, Some(Side::Plus), eq, ctx)?;
            let gm = g_value(&xc, Some(Side::Minus), eq, ctx)?;
            let v = v0_potential(&xc, &eq.v2);
            let m = (gp + gm - v).real().clone() - &l;
            if m > margin_max {
                margin_max = m;
            }
        }
    }

    Ok(EquilibriumReport {
        v2: eq.v2.clone(),
        lambda: [
            eq.lambda1_im.clone(),
            eq.lambda2.clone(),
            eq.lambda3.clone(),
        ],
        l,
        residual_support,
        residual_far_left_jump: residual_far_left,
        residual_gap_jump: residual_gap,
        inequality_margin_max: margin_max,
        grid,
    })
}
