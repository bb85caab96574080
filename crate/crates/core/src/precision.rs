//! Working-precision context plus the small numerical primitives everything
//! else is built on: bracketed root finding and the half-integer modified
//! Bessel function used as an independent oracle for moment closed forms.

use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::error::{Error, Result};

/// Which side of a cut on the real axis a boundary value is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from the upper half plane.
    Plus,
    /// Limit from the lower half plane.
    Minus,
}

impl Side {
    pub fn sign(self) -> i32 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }
}

/// Mantissa width and tolerances governing every numeric routine.
///
/// All values created through a context carry its precision; results of
/// quadrature and root finding are certified against `rel_tol`.
#[derive(Debug, Clone)]
pub struct PrecisionContext {
    bits: u32,
    rel_tol: Float,
    max_quad_depth: u32,
}

/// Default mantissa width. Hankel matrices are exponentially ill-conditioned
/// in the dimension, so the default is generous; override per run when needed.
pub const DEFAULT_MANTISSA_BITS: u32 = 512;

impl PrecisionContext {
    /// Context with `bits` of mantissa, `rel_tol = 2^(-bits/2)` and a
    /// subdivision depth budget wide enough for boundary-value dents.
    pub fn new(bits: u32) -> Self {
        assert!(bits >= 64, "mantissa_bits must be at least 64");
        let rel_tol = Float::with_val(bits, Float::i_exp(1, -((bits / 2) as i32)));
        PrecisionContext {
            bits,
            rel_tol,
            max_quad_depth: bits / 2 + 96,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: Float) -> Self {
        assert!(rel_tol > 0 && rel_tol < 1, "rel_tol must lie in (0, 1)");
        self.rel_tol = Float::with_val(self.bits, &rel_tol);
        self
    }

    pub fn with_max_quad_depth(mut self, depth: u32) -> Self {
        assert!(depth >= 1);
        self.max_quad_depth = depth;
        self
    }

    /// Same tolerances, doubled mantissa.
    pub fn doubled(&self) -> Self {
        PrecisionContext::new(self.bits * 2)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rel_tol(&self) -> &Float {
        &self.rel_tol
    }

    pub fn max_quad_depth(&self) -> u32 {
        self.max_quad_depth
    }

    pub fn real<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits, v)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    pub fn complex<T>(&self, v: T) -> Complex
    where
        Complex: rug::Assign<T>,
    {
        Complex::with_val(self.bits, v)
    }

    pub fn czero(&self) -> Complex {
        Complex::new(self.bits)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    /// 2^e as a Float of this precision.
    pub fn exp2(&self, e: i32) -> Float {
        Float::with_val(self.bits, Float::i_exp(1, e))
    }

    /// Parse a decimal string at this precision.
    pub fn parse_real(&self, s: &str) -> Result<Float> {
        Float::parse(s)
            .map(|p| Float::with_val(self.bits, p))
            .map_err(|e| Error::Domain(format!("cannot parse '{s}': {e}")))
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext::new(DEFAULT_MANTISSA_BITS)
    }
}

/// Absolute value of a complex number as a `Float`.
pub fn cabs(z: &Complex) -> Float {
    z.real().clone().hypot(z.imag())
}

/// Format a `Float` as a plain decimal string carrying full precision.
pub fn decimal_string(x: &Float) -> String {
    x.to_string_radix(10, None)
}

/// Bracketed root finding by bisection.
///
/// Requires `f(a) * f(b) < 0`. The returned point sits inside a bracket of
/// width at most `rel_tol * max(|a|, |b|, 1)`.
pub fn find_root_bracketed<F>(f: F, a: &Float, b: &Float, ctx: &PrecisionContext) -> Result<Float>
where
    F: Fn(&Float) -> Float,
{
    let mut lo = ctx.real(a);
    let mut hi = ctx.real(b);
    let mut flo = f(&lo);
    let fhi = f(&hi);
    if flo.is_zero() {
        return Ok(lo);
    }
    if fhi.is_zero() {
        return Ok(hi);
    }
    if (flo.is_sign_positive() && fhi.is_sign_positive())
        || (flo.is_sign_negative() && fhi.is_sign_negative())
    {
        return Err(Error::NoBracket {
            a: a.to_f64(),
            b: b.to_f64(),
        });
    }

    let mut scale = ctx.real(1);
    let aa = a.clone().abs();
    let bb = b.clone().abs();
    if aa > scale {
        scale = aa;
    }
    if bb > scale {
        scale = bb;
    }
    let target = (ctx.rel_tol() * &scale).complete(ctx.bits());

    loop {
        let mid = ctx.real(&lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            return Ok(mid);
        }
        let width = (&hi - &lo).complete(ctx.bits());
        if width <= target {
            return Ok(mid);
        }
        let fm = f(&mid);
        if fm.is_zero() {
            return Ok(mid);
        }
        if fm.is_sign_positive() == flo.is_sign_positive() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Modified Bessel function of the second kind at half-integer order,
/// `K_{n+1/2}(z)`, via the terminating closed form
///
/// `K_{n+1/2}(z) = sqrt(pi/(2z)) e^{-z} sum_{k=0}^{n} (n+k)! / (k! (n-k)! (2z)^k)`.
///
/// This is exact up to rounding and serves as the independent oracle for the
/// moment integrals of the singular weight.
pub fn bessel_k_half(n: u32, z: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(z.is_finite() && z.is_sign_positive()) || z.is_zero() {
        return Err(Error::Domain(format!(
            "bessel_k_half requires z > 0, got {}",
            z.to_f64()
        )));
    }
    let two_z = ctx.real(z) * 2u32;
    let inv_two_z = ctx.real(1) / &two_z;

    // sum_{k<=n} (n+k)! / (k! (n-k)!) (2z)^{-k}, built with exact integer
    // ratios between consecutive terms.
    let mut term = ctx.real(1);
    let mut sum = ctx.real(1);
    for k in 1..=n {
        // term_k / term_{k-1} = (n+k)(n-k+1) / k
        let num = ctx.real((n + k) * (n - k + 1));
        term *= num;
        term /= k;
        term *= &inv_two_z;
        sum += &term;
    }

    let pref = (ctx.pi() / &two_z).sqrt();
    let expf = (-ctx.real(z)).exp();
    Ok(pref * expf * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(192)
    }

    #[test]
    fn root_of_quadratic() {
        let c = ctx();
        let r = find_root_bracketed(
            |x| x.clone().square() - 2u32,
            &c.real(1),
            &c.real(2),
            &c,
        )
        .unwrap();
        let sqrt2 = c.real(2).sqrt();
        let err = (r - sqrt2).abs();
        assert!(err < c.exp2(-90));
    }

    #[test]
    fn root_of_branch_point_quartic() {
        // A^4 - 2A^3 - 1 on (-1, 0); bisection oracle gives -0.716673.
        let c = ctx();
        let f = |x: &Float| {
            let x2 = x.clone().square();
            x2.clone().square() - 2u32 * (x2 * x) - 1u32
        };
        let r = find_root_bracketed(f, &c.real(-1), &c.real(0), &c).unwrap();
        assert!((r.to_f64() + 0.716673).abs() < 1e-5);
    }

    #[test]
    fn root_at_zero() {
        let c = ctx();
        let r = find_root_bracketed(|x| x.clone(), &c.real(-1), &c.real(1), &c).unwrap();
        assert!(r.clone().abs() < c.exp2(-90));
    }

    #[test]
    fn no_bracket_is_rejected() {
        let c = ctx();
        let e = find_root_bracketed(|x| x.clone().square() + 1u32, &c.real(-1), &c.real(1), &c);
        assert!(matches!(e, Err(Error::NoBracket { .. })));
    }

    #[test]
    fn bessel_half_matches_elementary_form() {
        let c = ctx();
        // K_{1/2}(1) = sqrt(pi/2) e^{-1}
        let k = bessel_k_half(0, &c.real(1), &c).unwrap();
        let expect = (c.pi() / 2u32).sqrt() * (-c.real(1)).exp();
        let rel = ((k - &expect) / expect).abs();
        assert!(rel < c.exp2(-150));
        // K_{3/2}(1) = 2 K_{1/2}(1)
        let k32 = bessel_k_half(1, &c.real(1), &c).unwrap();
        let k12 = bessel_k_half(0, &c.real(1), &c).unwrap();
        let rel = (k32 / (k12 * 2u32) - 1u32).abs();
        assert!(rel < c.exp2(-150));
    }

    #[test]
    fn bessel_half_large_argument_ratio() {
        let c = ctx();
        // K_{1/2}(10) / (sqrt(pi/20) e^{-10}) = 1 exactly
        let k = bessel_k_half(0, &c.real(10), &c).unwrap();
        let denom = (c.pi() / 20u32).sqrt() * (-c.real(10)).exp();
        let rel = (k / denom - 1u32).abs();
        assert!(rel < c.exp2(-150));
    }

    #[test]
    fn bessel_recurrence_holds() {
        // K_{v+1}(z) = K_{v-1}(z) + (2v/z) K_v(z) for v = n + 1/2
        let c = ctx();
        for zf in [0.5_f64, 1.0, 5.0] {
            let z = c.real(zf);
            for n in 1..=20u32 {
                let km = bessel_k_half(n - 1, &z, &c).unwrap();
                let k0 = bessel_k_half(n, &z, &c).unwrap();
                let kp = bessel_k_half(n + 1, &z, &c).unwrap();
                let two_v = c.real(2 * n) + 1u32; // 2(n + 1/2)
                let rhs = km + two_v / &z * k0;
                let rel = ((kp.clone() - &rhs) / kp).abs();
                assert!(rel < c.rel_tol().clone(), "n={n} z={zf} rel={rel}");
            }
        }
    }

    #[test]
    fn bessel_rejects_nonpositive() {
        let c = ctx();
        assert!(bessel_k_half(0, &c.real(0), &c).is_err());
        assert!(bessel_k_half(0, &c.real(-1), &c).is_err());
    }
}
