//! The finite-N Riemann-Hilbert solution built from the computed orthogonal
//! polynomials (in the rescaled variables), the reproducing kernel by both
//! of its routes, and the contour-integral differential identities checked
//! against finite differences of the exact `log G_N`.

use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::hankel::{factorization_with_retry, partition_exact, HankelFactorization};
use crate::matrix2::Matrix2;
use crate::moments::{ModelParams, MomentCache};
use crate::precision::{cabs, decimal_string, find_root_bracketed, PrecisionContext, Side};
use crate::quad::Endpoint;

/// Recurrence data of the polynomials orthogonal to the rescaled weight
/// `w_N(y) = exp(-N(v2/(2y^2) + y^2/2) + v1/y)`, derived exactly from the
/// original-variable factorization by the power-of-N rescale
/// `a~_j = a_j/sqrt(N)`, `b~_j = b_j/N`, `h~_j = h_j N^{-(2j+1)/2}`.
#[derive(Debug, Clone)]
pub struct ScaledSystem {
    pub params: ModelParams,
    pub norms: Vec<Float>,
    pub recur_a: Vec<Float>,
    pub recur_b: Vec<Float>,
}

impl ScaledSystem {
    pub fn from_factorization(fact: &HankelFactorization, ctx: &PrecisionContext) -> Self {
        let n = fact.params.n();
        let prec = ctx.bits();
        let sqrt_n = ctx.real(n as u32).sqrt();
        let nf = ctx.real(n as u32);
        let recur_a = fact
            .recur_a
            .iter()
            .map(|a| (a / &sqrt_n).complete(prec))
            .collect();
        let recur_b = fact
            .recur_b
            .iter()
            .map(|b| (b / &nf).complete(prec))
            .collect();
        let mut norms = Vec::with_capacity(fact.norms.len());
        let mut scale = sqrt_n.clone(); // N^{(2j+1)/2} at j = 0
        for h in &fact.norms {
            norms.push((h / &scale).complete(prec));
            scale *= &nf;
        }
        ScaledSystem {
            params: fact.params.clone(),
            norms,
            recur_a,
            recur_b,
        }
    }

    /// `pi~_0 .. pi~_{upto}` at a complex point.
    pub fn poly_values(&self, y: &Complex, upto: usize) -> Vec<Complex> {
        let prec = y.prec().0;
        let mut out = Vec::with_capacity(upto + 1);
        out.push(Complex::with_val(prec, 1));
        if upto == 0 {
            return out;
        }
        out.push(y.clone() - Complex::with_val(prec, &self.recur_a[0]));
        for j in 1..upto {
            let shifted = y.clone() - Complex::with_val(prec, &self.recur_a[j]);
            let mut next = shifted * &out[j];
            next -= Complex::with_val(prec, &self.recur_b[j]) * &out[j - 1];
            out.push(next);
        }
        out
    }

    pub fn poly_values_and_derivatives(
        &self,
        y: &Complex,
        upto: usize,
    ) -> (Vec<Complex>, Vec<Complex>) {
        let prec = y.prec().0;
        let vals = self.poly_values(y, upto);
        let mut ders = Vec::with_capacity(upto + 1);
        ders.push(Complex::new(prec));
        if upto == 0 {
            return (vals, ders);
        }
        ders.push(Complex::with_val(prec, 1));
        for j in 1..upto {
            let shifted = y.clone() - Complex::with_val(prec, &self.recur_a[j]);
            let mut next = shifted * &ders[j];
            next += &vals[j];
            next -= Complex::with_val(prec, &self.recur_b[j]) * &ders[j - 1];
            ders.push(next);
        }
        (vals, ders)
    }

    /// Rescaled weight on the real axis.
    pub fn weight(&self, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
        let prec = ctx.bits();
        if x.is_zero() {
            return Ok(Float::new(prec));
        }
        let n = ctx.real(self.params.n() as u32);
        let v2 = self.params.v2();
        let v1 = self.params.v1();
        let x2 = x.clone().square();
        let mut e = -(n.clone() * &v2) / (x2.clone() * 2u32);
        e -= n * x2 / 2u32;
        e += v1 / x;
        Ok(e.exp())
    }

    /// Integration cutoffs outside which the weight is below `2^-(bits+64)`.
    fn cutoffs(&self, ctx: &PrecisionContext) -> (Float, Float) {
        let prec = ctx.bits();
        let big = ctx.real(ctx.bits() + 64) * ctx.real(2).ln();
        let n = ctx.real(self.params.n() as u32);
        let v2 = self.params.v2();
        let v1 = self.params.v1();
        // lower: solve N v2/(2x^2) - v1_+/x = B
        let t_plus = if v1.is_sign_positive() && !v1.is_zero() {
            v1.clone()
        } else {
            ctx.zero()
        };
        let nv2 = (&n * &v2).complete(prec);
        let disc = (t_plus.clone().square() + nv2.clone() * &big * 2u32).sqrt();
        let x_lo = nv2 / (t_plus + disc);
        // upper: N x^2/2 dominates
        let mut x_hi = ((big.clone() / &n).sqrt() * 2u32).max(&ctx.real(4));
        let log_w = |x: &Float| -> Float {
            let x2 = x.clone().square();
            -(n.clone() * &v2) / (x2.clone() * 2u32) - n.clone() * x2 / 2u32
                + v1.clone() / x
        };
        while log_w(&x_hi) > -big.clone() {
            x_hi *= 2u32;
        }
        (x_lo, x_hi)
    }

    /// Cauchy transforms
    /// `(1/(2 pi i)) int pi~_j(s) w_N(s)/(s - y)^p ds`, `p = 1, 2`, of the
    /// degrees `N` and `N-1` in one weight sweep, for `y` off the real axis.
    /// Returns `[C_N, C_{N-1}, C'_N, C'_{N-1}]`.
    pub fn cauchy_bundle(&self, y: &Complex, ctx: &PrecisionContext) -> Result<[Complex; 4]> {
        let prec = ctx.bits();
        if y.imag().is_zero() {
            return Err(Error::SideRequired);
        }
        let n = self.params.n();
        let (x_lo, x_hi) = self.cutoffs(ctx);
        let mut total = <[Complex; 4] as crate::quad::QuadValue>::zero(prec);
        for sign in [-1i32, 1] {
            let (a, b) = if sign < 0 {
                (-x_hi.clone(), -x_lo.clone())
            } else {
                (x_lo.clone(), x_hi.clone())
            };
            let (part, _, _) = crate::quad::integrate_real_bundle(
                |x: &Float| {
                    let w = self.weight(x, ctx)?;
                    let xc = Complex::with_val(prec, (x, &Float::new(prec)));
                    let polys = self.poly_values(&xc, n);
                    let pn = (&polys[n] * &w).complete((prec, prec));
                    let pm = (&polys[n - 1] * &w).complete((prec, prec));
                    let den = xc - y;
                    let den2 = den.clone().square();
                    Ok([
                        pn.clone() / &den,
                        pm.clone() / &den,
                        pn / &den2,
                        pm / &den2,
                    ])
                },
                &a,
                &b,
                [Endpoint::Regular; 2],
                ctx,
            )?;
            crate::quad::QuadValue::add_assign(&mut total, &part);
        }
        let two_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * 2u32;
        Ok(total.map(|c| c / &two_pi_i))
    }
}

/// The 2x2 Riemann-Hilbert solution
/// `Y = (pi_N, C[pi_N w]; k pi_{N-1}, k C[pi_{N-1} w])` with
/// `k = -2 pi i / h_{N-1}`, for `y` off the real axis.
pub fn y_matrix(y: &Complex, sys: &ScaledSystem, ctx: &PrecisionContext) -> Result<Matrix2> {
    Ok(y_matrix_and_derivative(y, sys, ctx)?.0)
}

/// `Y` and its y-derivative.
pub fn y_matrix_and_derivative(
    y: &Complex,
    sys: &ScaledSystem,
    ctx: &PrecisionContext,
) -> Result<(Matrix2, Matrix2)> {
    let n = sys.params.n();
    let prec = ctx.bits();
    let (polys, ders) = sys.poly_values_and_derivatives(y, n);
    let kappa = {
        let two_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * 2u32;
        -two_pi_i / &sys.norms[n - 1]
    };
    let [c_n, c_nm1, d_n, d_nm1] = sys.cauchy_bundle(y, ctx)?;
    let ym = Matrix2::new(
        polys[n].clone(),
        c_n,
        (&kappa * &polys[n - 1]).complete((prec, prec)),
        kappa.clone() * c_nm1,
    );
    let yd = Matrix2::new(
        ders[n].clone(),
        d_n,
        (&kappa * &ders[n - 1]).complete((prec, prec)),
        kappa * d_nm1,
    );
    Ok((ym, yd))
}

/// Boundary value of `Y` on the real axis from the given side: a direct
/// evaluation at `x + i s 2^{-bits/4}`, with one linear-in-epsilon
/// extrapolation step. The offset sits ten orders below the verification
/// tolerances, so the extrapolation is belt and braces.
pub fn y_matrix_boundary(
    x: &Float,
    side: Side,
    sys: &ScaledSystem,
    ctx: &PrecisionContext,
) -> Result<Matrix2> {
    let prec = ctx.bits();
    let eps = ctx.exp2(-(ctx.bits() as i32) / 4);
    let at = |e: &Float| -> Result<Matrix2> {
        let off = e.clone() * side.sign();
        let yc = Complex::with_val(prec, (x, &off));
        y_matrix(&yc, sys, ctx)
    };
    let m1 = at(&eps)?;
    let m2 = at(&(eps.clone() / 2u32))?;
    // 2 m(e/2) - m(e) cancels the O(e) term
    let two = |m: &Matrix2| -> Matrix2 {
        Matrix2::new(
            m.e11.clone() * 2u32,
            m.e12.clone() * 2u32,
            m.e21.clone() * 2u32,
            m.e22.clone() * 2u32,
        )
    };
    Ok(two(&m2).sub(&m1))
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

/// Reproducing kernel by the orthonormal sum and by the
/// Christoffel-Darboux/Y route; returns `(sum, cd, |difference|)`.
pub fn kernel_value(
    x: &Float,
    y: &Float,
    sys: &ScaledSystem,
    ctx: &PrecisionContext,
) -> Result<(Float, Float, Float)> {
    if x == y {
        return Err(Error::Domain("kernel routes compared off-diagonal".into()));
    }
    let n = sys.params.n();
    let prec = ctx.bits();
    let wx = sys.weight(x, ctx)?;
    let wy = sys.weight(y, ctx)?;
    let pref = (wx * wy).sqrt();

    let xc = Complex::with_val(prec, (x, &Float::new(prec)));
    let yc = Complex::with_val(prec, (y, &Float::new(prec)));
    let px = sys.poly_values(&xc, n - 1);
    let py = sys.poly_values(&yc, n - 1);
    let mut sum = Float::new(prec);
    for j in 0..n {
        let term = (&px[j] * &py[j]).complete((prec, prec));
        sum += term.real().clone() / &sys.norms[j];
    }
    let k_sum = (&pref * &sum).complete(prec);

    // (0 1) Y_+^{-1}(y) Y_+(x) (1 0)^T / (2 pi i (x - y))
    let yx = y_matrix_boundary(x, Side::Plus, sys, ctx)?;
    let yy = y_matrix_boundary(y, Side::Plus, sys, ctx)?;
    let yy_inv = yy.inverse();
    // second row of Y^{-1}(y) times first column of Y(x)
    let val = (&yy_inv.e21 * &yx.e11).complete((prec, prec))
        + (&yy_inv.e22 * &yx.e21).complete((prec, prec));
    let two_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * 2u32;
    let dx = x.clone() - y;
    let k_cd_c = val / (two_pi_i * Complex::with_val(prec, &dx));
    let k_cd = pref * k_cd_c.real();

    let diff = (&k_sum - k_cd.clone()).abs();
    Ok((k_sum, k_cd, diff))
}

/// Diagonal kernel value by the orthonormal sum.
pub fn kernel_diag_sum(x: &Float, sys: &ScaledSystem, ctx: &PrecisionContext) -> Result<Float> {
    let n = sys.params.n();
    let prec = ctx.bits();
    let w = sys.weight(x, ctx)?;
    let xc = Complex::with_val(prec, (x, &Float::new(prec)));
    let px = sys.poly_values(&xc, n - 1);
    let mut sum = Float::new(prec);
    for j in 0..n {
        let sq = px[j].real().clone().square();
        sum += sq / &sys.norms[j];
    }
    Ok(w * sum)
}

/// Diagonal kernel value by l'Hopital on the Y route:
/// `w(x)/(2 pi i) * (Y_+^{-1} Y_+')_{21-corner}`.
pub fn kernel_diag_cd(x: &Float, sys: &ScaledSystem, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.bits();
    let eps = ctx.exp2(-(ctx.bits() as i32) / 4);
    let yc = Complex::with_val(prec, (x, &eps));
    let (ym, yd) = y_matrix_and_derivative(&yc, sys, ctx)?;
    let inv = ym.inverse();
    // tr(Y^{-1} Y' E_{12-selector}): row 2 of Y^{-1} times column 1 of Y'
    let val = (&inv.e21 * &yd.e11).complete((prec, prec))
        + (&inv.e22 * &yd.e21).complete((prec, prec));
    let two_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * 2u32;
    let w = sys.weight(x, ctx)?;
    Ok((val / two_pi_i).real().clone() * w)
}

// ---------------------------------------------------------------------------
// Differential identities
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub contour: Float,
    pub finite_diff: Float,
    pub rel_err: Float,
}

/// Residuals of the structural checks on `Y` plus both differential
/// identities compared against finite differences of the exact `log G_N`.
#[derive(Debug, Clone)]
pub struct RHCheckReport {
    pub params: ModelParams,
    pub jump_residual_max: Float,
    pub det_residual_max: Float,
    pub id_v1: IdentityCheck,
    pub id_v2: IdentityCheck,
}

impl RHCheckReport {
    pub fn to_json(&self) -> serde_json::Value {
        let id = |c: &IdentityCheck| {
            serde_json::json!({
                "contour": decimal_string(&c.contour),
                "finite_diff": decimal_string(&c.finite_diff),
                "rel_err": decimal_string(&c.rel_err),
            })
        };
        serde_json::json!({
            "N": self.params.n(),
            "z": decimal_string(self.params.z()),
            "t": decimal_string(self.params.t()),
            "jump_residual_max": decimal_string(&self.jump_residual_max),
            "det_residual_max": decimal_string(&self.det_residual_max),
            "id_v1": id(&self.id_v1),
            "id_v2": id(&self.id_v2),
        })
    }
}

/// Pick the contour radius: at most half the inner support edge, and small
/// enough that the weight on the real axis is below `2^-bits` there, making
/// the trace analytic on the circle up to that error.
fn identity_radius(sys: &ScaledSystem, ctx: &PrecisionContext) -> Result<Float> {
    let eq = crate::equilibrium::solve_branch_points(&sys.params.v2(), ctx)?;
    let cap = eq.lambda2().clone() / 2u32;
    let n = ctx.real(sys.params.n() as u32);
    let v2 = sys.params.v2();
    let v1 = sys.params.v1();
    let big = ctx.real(ctx.bits()) * ctx.real(2).ln();
    let f = |x: &Float| -> Float {
        let x2 = x.clone().square();
        let mut lw = -(n.clone() * &v2) / (x2.clone() * 2u32);
        lw -= n.clone() * x2 / 2u32;
        lw += v1.clone() / x;
        lw + &big
    };
    // weight is astronomically small at the left end of the bracket
    let lo = (eq.lambda2().clone() / 1000u32).min(&ctx.real(1e-3));
    if f(&cap).is_sign_negative() {
        return Ok(cap);
    }
    find_root_bracketed(f, &lo, &cap, ctx)
}

/// Trapezoidal samples of `alpha(y) = tr(Y^{-1} Y' sigma3)` around the
/// origin feeding both contour integrals at once, doubling until stable.
fn contour_identities(
    sys: &ScaledSystem,
    radius: &Float,
    ctx: &PrecisionContext,
) -> Result<(Float, Float)> {
    let prec = ctx.bits();
    let two_pi = ctx.pi() * 2u32;
    let alpha = |theta: &Float| -> Result<(Complex, Complex)> {
        let dir = Complex::with_val(prec, (theta.clone().cos(), theta.clone().sin()));
        let y = (&dir * radius).complete((prec, prec));
        let (ym, yd) = y_matrix_and_derivative(&y, sys, ctx)?;
        let inv = ym.inverse();
        // tr(Y^{-1} Y' sigma3) = (Y^{-1}Y')_{11} - (Y^{-1}Y')_{22}
        let t11 = (&inv.e11 * &yd.e11).complete((prec, prec))
            + (&inv.e12 * &yd.e21).complete((prec, prec));
        let t22 = (&inv.e21 * &yd.e12).complete((prec, prec))
            + (&inv.e22 * &yd.e22).complete((prec, prec));
        let a = t11 - t22;
        // dy = i r e^{i theta} d theta; integrands alpha/y and alpha/y^2
        let i_c = Complex::with_val(prec, (0, 1));
        let f1 = (&a * &i_c).complete((prec, prec));
        let f2 = a * i_c / y;
        Ok((f1, f2))
    };

    // midpoint sampling: the nodes pi(2k+1)/M never touch the real axis
    let level_sum = |m: usize| -> Result<(Complex, Complex)> {
        let mut acc1 = Complex::new(prec);
        let mut acc2 = Complex::new(prec);
        for k in 0..m {
            let t = ctx.pi() * ctx.real((2 * k + 1) as u32) / ctx.real(m as u32);
            let (a, b) = alpha(&t)?;
            acc1 += a;
            acc2 += b;
        }
        let w = two_pi.clone() / ctx.real(m as u32);
        Ok((acc1 * &w, acc2 * w))
    };
    let mut m: usize = 32;
    let mut prev = level_sum(m)?;
    loop {
        let m2 = m * 2;
        let curr = level_sum(m2)?;
        let d1 = cabs(&(curr.0.clone() - &prev.0));
        let d2 = cabs(&(curr.1.clone() - &prev.1));
        let s1 = cabs(&curr.0).max(&ctx.real(1e-30));
        let s2 = cabs(&curr.1).max(&ctx.real(1e-30));
        m = m2;
        let settled =
            (d1.clone() / s1).to_f64() < 1e-10 && (d2.clone() / s2).to_f64() < 1e-10;
        if settled {
            // d log G/d v1 = -(1/4 pi i) contour(alpha/y dy)
            // d log G/d v2 = (N/8 pi i) contour(alpha/y^2 dy)
            let four_pi_i = Complex::with_val(prec, (0, 1)) * ctx.pi() * 4u32;
            let v1_id = -(curr.0.clone() / &four_pi_i);
            let v2_id = curr.1.clone()
                * Float::with_val(prec, sys.params.n() as u32)
                / (four_pi_i * 2u32);
            return Ok((v1_id.real().clone(), v2_id.real().clone()));
        }
        if m > 1 << 14 {
            return Err(Error::QuadratureNonConvergence {
                partial: Box::new(cabs(&curr.0)),
                error_bound: Box::new(d1),
                panels: m,
            });
        }
        prev = curr;
    }
}

/// Verify `det Y = 1`, the jump across the real axis, and both differential
/// identities against centered finite differences of the exact `log G_N`
/// (step `1e-6` in the rescaled variables).
pub fn check_identities(
    params: &ModelParams,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<RHCheckReport> {
    let prec = ctx.bits();
    let n = params.n();
    let (fact, _, mut used_ctx) = factorization_with_retry(params, ctx, cache)?;
    // the structural checks target ~1e-10; cap the inner quadrature work
    if used_ctx.bits() > 176 {
        let loose = used_ctx.exp2(-88);
        used_ctx = used_ctx.with_rel_tol(loose);
    }
    let sys = ScaledSystem::from_factorization(&fact, &used_ctx);

    // det Y - 1 on a small complex grid
    let mut det_res = ctx.zero();
    for (re, im) in [(2.0, 0.5), (0.0, 2.0), (-1.0, 1.0), (0.5, -1.5), (0.3, 0.08)] {
        let y = Complex::with_val(prec, (re, im));
        let m = y_matrix(&y, &sys, &used_ctx)?;
        let d = cabs(&(m.det() - 1u32));
        if d > det_res {
            det_res = d;
        }
    }

    // jump residual Y_+ = Y_- (1, w; 0, 1) at a few real points
    let mut jump_res = ctx.zero();
    for xf in [0.5f64, 1.0, -0.8] {
        let x = used_ctx.real(xf);
        let yp = y_matrix_boundary(&x, Side::Plus, &sys, &used_ctx)?;
        let ym = y_matrix_boundary(&x, Side::Minus, &sys, &used_ctx)?;
        let w = sys.weight(&x, &used_ctx)?;
        let jump = Matrix2::new(
            Complex::with_val(prec, 1),
            Complex::with_val(prec, &w),
            Complex::new(prec),
            Complex::with_val(prec, 1),
        );
        let r = yp.sub(&ym.mul(&jump)).max_norm();
        if r > jump_res {
            jump_res = r;
        }
    }

    // contour side of the identities
    let radius = identity_radius(&sys, &used_ctx)?;
    let (c_v1, c_v2) = contour_identities(&sys, &radius, &used_ctx)?;

    // finite-difference side on the exact route
    let delta = used_ctx.real(1e-6);
    let log_g = |v1: &Float, v2: &Float| -> Result<Float> {
        let z = used_ctx.real(n as u32) * v2.clone().sqrt();
        let t = used_ctx.real(n as u32).sqrt() * v1;
        let p = ModelParams::new(n, z, t)?;
        Ok(partition_exact(&p, &used_ctx, cache)?.log_g_n)
    };
    let v1_0 = params.v1();
    let v2_0 = params.v2();
    let fd_v1 = (log_g(&(v1_0.clone() + &delta), &v2_0)? - log_g(&(v1_0.clone() - &delta), &v2_0)?)
        / (delta.clone() * 2u32);
    let fd_v2 = (log_g(&v1_0, &(v2_0.clone() + &delta))? - log_g(&v1_0, &(v2_0.clone() - &delta))?)
        / (delta.clone() * 2u32);

    let rel = |a: &Float, b: &Float| -> Float {
        let scale = b.clone().abs().max(&used_ctx.real(1e-20));
        (a - b.clone()).abs() / scale
    };
    let id_v1 = IdentityCheck {
        rel_err: if fd_v1.clone().abs() < 1e-9 {
            // odd derivative at t = 0: compare absolutely
            (c_v1.clone() - &fd_v1).abs()
        } else {
            rel(&c_v1, &fd_v1)
        },
        contour: c_v1,
        finite_diff: fd_v1,
    };
    let id_v2 = IdentityCheck {
        rel_err: rel(&c_v2, &fd_v2),
        contour: c_v2,
        finite_diff: fd_v2,
    };

    Ok(RHCheckReport {
        params: params.clone(),
        jump_residual_max: jump_res,
        det_residual_max: det_res,
        id_v1,
        id_v2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_real;
    use rug::ops::Pow;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(256)
    }

    fn system(n: usize, z: f64, t: f64, c: &PrecisionContext) -> ScaledSystem {
        let p = ModelParams::new(n, c.real(z), c.real(t)).unwrap();
        let (fact, _, _) = factorization_with_retry(&p, c, None).unwrap();
        ScaledSystem::from_factorization(&fact, c)
    }

    #[test]
    fn det_y_is_one() {
        let c = ctx();
        let sys = system(4, 1.0, 0.0, &c);
        let y = Complex::with_val(c.bits(), (0, 2));
        let m = y_matrix(&y, &sys, &c).unwrap();
        let d = cabs(&(m.det() - 1u32));
        assert!(d.to_f64() < 1e-10, "det residual {d}");
        // grid sweep
        for (re, im) in [(1.5, 0.3), (-0.7, 0.9), (0.2, -1.1)] {
            let y = Complex::with_val(c.bits(), (re, im));
            let m = y_matrix(&y, &sys, &c).unwrap();
            let d = cabs(&(m.det() - 1u32));
            assert!(d.to_f64() < 1e-10, "det residual {d} at ({re},{im})");
        }
    }

    #[test]
    fn y_normalization_at_infinity() {
        // Y(y) diag(y^{-N}, y^{N}) -> I with O(1/y) decay along iR
        let c = ctx();
        let n = 2usize;
        let sys = system(n, 1.0, 0.0, &c);
        let dev = |r: f64| -> f64 {
            let y = Complex::with_val(c.bits(), (0, r));
            let m = y_matrix(&y, &sys, &c).unwrap();
            let yn = y.clone().pow(n as u32);
            let scaled = Matrix2::new(
                m.e11.clone() / &yn,
                m.e12.clone() * &yn,
                m.e21.clone() / &yn,
                m.e22.clone() * &yn,
            );
            scaled.sub(&Matrix2::identity(c.bits())).max_norm().to_f64()
        };
        let d2 = dev(1e2);
        let d3 = dev(1e3);
        let ratio = d2 / d3;
        assert!((ratio - 10.0).abs() < 2.0, "decay ratio {ratio}");
    }

    #[test]
    fn jump_across_real_axis() {
        let c = ctx();
        let sys = system(3, 1.0, 0.0, &c);
        let x = c.real(0.5);
        let yp = y_matrix_boundary(&x, Side::Plus, &sys, &c).unwrap();
        let ym = y_matrix_boundary(&x, Side::Minus, &sys, &c).unwrap();
        let w = sys.weight(&x, &c).unwrap();
        let jump = Matrix2::new(
            Complex::with_val(c.bits(), 1),
            Complex::with_val(c.bits(), &w),
            Complex::new(c.bits()),
            Complex::with_val(c.bits(), 1),
        );
        let r = yp.sub(&ym.mul(&jump)).max_norm();
        assert!(r.to_f64() < 1e-8, "jump residual {r}");
    }

    #[test]
    fn kernel_routes_agree() {
        let c = ctx();
        let sys = system(4, 1.0, 0.0, &c);
        let (ks, kc, diff) = kernel_value(&c.real(0.3), &c.real(0.7), &sys, &c).unwrap();
        assert!(diff.to_f64() < 1e-8, "kernel diff {diff} ({ks} vs {kc})");
        // symmetry of the sum route
        let (ks2, _, _) = kernel_value(&c.real(0.7), &c.real(0.3), &sys, &c).unwrap();
        assert!((ks.clone() - ks2).abs().to_f64() < 1e-20);
        // diagonal: l'Hopital route matches the sum of squares
        let ds = kernel_diag_sum(&c.real(0.5), &sys, &c).unwrap();
        let dc = kernel_diag_cd(&c.real(0.5), &sys, &c).unwrap();
        assert!(
            ((ds.clone() - &dc) / &ds).abs().to_f64() < 1e-8,
            "diag {ds} vs {dc}"
        );
    }

    #[test]
    fn kernel_trace_counts_states() {
        // integral of K_N(x,x) dx = N
        let c = ctx();
        let n = 4usize;
        let sys = system(n, 1.0, 0.0, &c);
        let (x_lo, x_hi) = sys.cutoffs(&c);
        let mut total = c.zero();
        for sign in [-1i32, 1] {
            let (a, b) = if sign < 0 {
                (-x_hi.clone(), -x_lo.clone())
            } else {
                (x_lo.clone(), x_hi.clone())
            };
            let q = integrate_real(
                |x: &Float| kernel_diag_sum(x, &sys, &c),
                &a,
                &b,
                [Endpoint::Regular; 2],
                &c,
            )
            .unwrap();
            total += q.value;
        }
        let err = (total - c.real(n as u32)).abs();
        assert!(err.to_f64() < 1e-6, "trace error {err}");
    }

    #[test]
    fn identities_against_finite_differences() {
        let c = ctx();
        let p = ModelParams::new(4, c.real(1), c.real(0.3)).unwrap();
        let rep = check_identities(&p, &c, None).unwrap();
        assert!(
            rep.id_v1.rel_err.to_f64() < 1e-5,
            "v1 identity rel err {}",
            rep.id_v1.rel_err
        );
        assert!(
            rep.id_v2.rel_err.to_f64() < 1e-5,
            "v2 identity rel err {}",
            rep.id_v2.rel_err
        );
        assert!(rep.det_residual_max.to_f64() < 1e-10);
        assert!(rep.jump_residual_max.to_f64() < 1e-8);
    }

    #[test]
    fn v1_identity_vanishes_at_t_zero() {
        let c = ctx();
        let p = ModelParams::new(3, c.real(1), c.zero()).unwrap();
        let rep = check_identities(&p, &c, None).unwrap();
        // odd-in-t derivative at t = 0
        assert!(
            rep.id_v1.contour.clone().abs().to_f64() < 1e-8,
            "contour v1 {}",
            rep.id_v1.contour
        );
    }
}
