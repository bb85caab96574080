//! Adaptive panel quadrature with high-order Gauss-Legendre nodes.
//!
//! Panels are bisected greedily (largest estimated error first) until the
//! summed panel error meets the context's relative tolerance. Endpoint
//! singularities of inverse-square-root type are declared by the caller and
//! removed by a substitution before any node is placed, so the engine only
//! ever sees analytic integrands. Closed circular contours use the
//! trapezoidal rule, which is spectrally accurate for periodic integrands.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::{cabs, PrecisionContext};

/// Behaviour of the integrand at a panel endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    /// Integrand is finite at the endpoint.
    Regular,
    /// Integrand blows up like the inverse square root of the distance
    /// to the endpoint.
    InverseSqrt,
}

/// Result of an adaptive integration of a real-valued integrand.
#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: Float,
    pub error_bound: Float,
    pub panels_used: usize,
}

/// Result of an adaptive integration along a complex path.
#[derive(Debug, Clone)]
pub struct ComplexQuadrature {
    pub value: Complex,
    pub error_bound: Float,
    pub panels_used: usize,
}

const ORDER_LO: usize = 24;
const ORDER_HI: usize = 48;

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes
// ---------------------------------------------------------------------------

type NodeTable = Arc<Vec<(Float, Float)>>;

fn node_cache() -> &'static RwLock<HashMap<(usize, u32), NodeTable>> {
    static CACHE: std::sync::OnceLock<RwLock<HashMap<(usize, u32), NodeTable>>> =
        std::sync::OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn legendre_and_derivative(n: usize, x: &Float, prec: u32) -> (Float, Float) {
    let mut p_prev = Float::with_val(prec, 1);
    let mut p = Float::with_val(prec, x);
    for j in 1..n {
        // (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
        let mut next = Float::with_val(prec, (2 * j + 1) as u32) * x * &p;
        next -= Float::with_val(prec, j as u32) * &p_prev;
        next /= (j + 1) as u32;
        p_prev = p;
        p = next;
    }
    // P'_n = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = Float::with_val(prec, n as u32) * (x.clone() * &p - &p_prev);
    let den = x.clone().square() - 1u32;
    (p, num / den)
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on (-1, 1),
/// computed once per (order, precision) pair and cached process-wide.
pub fn gauss_legendre_nodes(order: usize, prec: u32) -> NodeTable {
    if let Some(t) = node_cache().read().unwrap().get(&(order, prec)) {
        return t.clone();
    }
    let work = prec + 64;
    let pi = Float::with_val(work, rug::float::Constant::Pi);
    let mut table = Vec::with_capacity(order);
    let half = order / 2;
    for k in 0..half {
        // Chebyshev-style initial guess for the k-th positive root.
        let guess = {
            let arg = pi.clone() * Float::with_val(work, (k as f64) + 0.75)
                / Float::with_val(work, (order as f64) + 0.5);
            arg.cos()
        };
        let mut x = guess;
        for _ in 0..64 {
            let (p, dp) = legendre_and_derivative(order, &x, work);
            let step = p / dp;
            x -= &step;
            if step.is_zero() || step.get_exp().map(|e| e < -(prec as i32 + 16)).unwrap_or(true)
            {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(order, &x, work);
        let w = Float::with_val(work, 2)
            / ((Float::with_val(work, 1) - x.clone().square()) * dp.square());
        let xq = Float::with_val(prec, &x);
        let wq = Float::with_val(prec, &w);
        table.push((xq.clone(), wq.clone()));
        table.push((-xq, wq));
    }
    if order % 2 == 1 {
        let x = Float::with_val(prec, 0);
        let (_, dp) = legendre_and_derivative(order, &Float::with_val(work, 0), work);
        let w = Float::with_val(work, 2) / dp.square();
        table.push((x, Float::with_val(prec, &w)));
    }
    let arc: NodeTable = Arc::new(table);
    node_cache()
        .write()
        .unwrap()
        .insert((order, prec), arc.clone());
    arc
}

// ---------------------------------------------------------------------------
// Values the engine can integrate
// ---------------------------------------------------------------------------

/// Minimal vector-space surface the panel engine needs.
pub trait QuadValue: Clone {
    fn zero(prec: u32) -> Self;
    fn accumulate(&mut self, v: &Self, w: &Float);
    fn add_assign(&mut self, v: &Self);
    fn magnitude(&self) -> Float;
    fn diff_magnitude(&self, other: &Self) -> Float;
    fn is_finite(&self) -> bool;
}

impl QuadValue for Float {
    fn zero(prec: u32) -> Self {
        Float::new(prec)
    }
    fn accumulate(&mut self, v: &Self, w: &Float) {
        *self += (v * w).complete(self.prec());
    }
    fn add_assign(&mut self, v: &Self) {
        *self += v;
    }
    fn magnitude(&self) -> Float {
        self.clone().abs()
    }
    fn diff_magnitude(&self, other: &Self) -> Float {
        (self - other.clone()).abs()
    }
    fn is_finite(&self) -> bool {
        Float::is_finite(self)
    }
}

impl QuadValue for Complex {
    fn zero(prec: u32) -> Self {
        Complex::new(prec)
    }
    fn accumulate(&mut self, v: &Self, w: &Float) {
        *self += (v * w).complete((self.prec().0, self.prec().1));
    }
    fn add_assign(&mut self, v: &Self) {
        *self += v;
    }
    fn magnitude(&self) -> Float {
        cabs(self)
    }
    fn diff_magnitude(&self, other: &Self) -> Float {
        cabs(&(self - other.clone()))
    }
    fn is_finite(&self) -> bool {
        self.real().is_finite() && self.imag().is_finite()
    }
}

impl<const K: usize> QuadValue for [Float; K] {
    fn zero(prec: u32) -> Self {
        std::array::from_fn(|_| Float::new(prec))
    }
    fn accumulate(&mut self, v: &Self, w: &Float) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += (x * w).complete(s.prec());
        }
    }
    fn add_assign(&mut self, v: &Self) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += x;
        }
    }
    fn magnitude(&self) -> Float {
        let mut m = self[0].clone().abs();
        for x in &self[1..] {
            m += x.clone().abs();
        }
        m
    }
    fn diff_magnitude(&self, other: &Self) -> Float {
        let mut m = Float::new(self[0].prec());
        for (a, b) in self.iter().zip(other) {
            m += (a - b.clone()).abs();
        }
        m
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|x| Float::is_finite(x))
    }
}

impl<const K: usize> QuadValue for [Complex; K] {
    fn zero(prec: u32) -> Self {
        std::array::from_fn(|_| Complex::new(prec))
    }
    fn accumulate(&mut self, v: &Self, w: &Float) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += (x * w).complete((s.prec().0, s.prec().1));
        }
    }
    fn add_assign(&mut self, v: &Self) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += x;
        }
    }
    fn magnitude(&self) -> Float {
        let mut m = cabs(&self[0]);
        for x in &self[1..] {
            m += cabs(x);
        }
        m
    }
    fn diff_magnitude(&self, other: &Self) -> Float {
        let mut m = Float::new(self[0].prec().0);
        for (a, b) in self.iter().zip(other) {
            m += cabs(&(a - b.clone()));
        }
        m
    }
    fn is_finite(&self) -> bool {
        self.iter()
            .all(|x| x.real().is_finite() && x.imag().is_finite())
    }
}

// ---------------------------------------------------------------------------
// Panel engine
// ---------------------------------------------------------------------------

struct Panel<V> {
    lo: Float,
    hi: Float,
    value: V,
    err: Float,
    mass: Float,
    depth: u32,
}

fn eval_panel<V: QuadValue, F>(
    f: &F,
    lo: &Float,
    hi: &Float,
    depth: u32,
    prec: u32,
) -> Result<Panel<V>>
where
    F: Fn(&Float) -> Result<V>,
{
    let mid = Float::with_val(prec, lo + hi.clone()) / 2u32;
    let half = Float::with_val(prec, hi - lo.clone()) / 2u32;

    let mut coarse = V::zero(prec);
    let nodes_lo = gauss_legendre_nodes(ORDER_LO, prec);
    for (x, w) in nodes_lo.iter() {
        let t = mid.clone() + (x * &half).complete(prec);
        let v = f(&t)?;
        if !v.is_finite() {
            return Err(Error::BadIntegrand { at: t.to_f64() });
        }
        coarse.accumulate(&v, w);
    }

    let mut fine = V::zero(prec);
    let mut mass = Float::new(prec);
    let nodes_hi = gauss_legendre_nodes(ORDER_HI, prec);
    for (x, w) in nodes_hi.iter() {
        let t = mid.clone() + (x * &half).complete(prec);
        let v = f(&t)?;
        if !v.is_finite() {
            return Err(Error::BadIntegrand { at: t.to_f64() });
        }
        fine.accumulate(&v, w);
        mass += v.magnitude() * w;
    }

    let mut err = fine.diff_magnitude(&coarse) * &half;
    // The |fine - coarse| difference tracks the low-order rule's error; once
    // the pair is deep in its convergence regime the high-order value is far
    // better than that. Extrapolate with the order ratio (49 -> 97), capped
    // by the raw difference and floored well above rounding.
    {
        let scale = (mass.clone() * &half).max(&err);
        if !scale.is_zero() {
            let q = err.clone() / &scale;
            if q < 1e-8 {
                let boosted = scale * q.square() * 1e6;
                if boosted < err {
                    err = boosted;
                }
            }
        }
    }
    let mut value = fine;
    {
        // scale the node sums by the half-length jacobian
        let mut scaled = V::zero(prec);
        scaled.accumulate(&value, &half);
        value = scaled;
    }
    mass *= &half;
    Ok(Panel {
        lo: lo.clone(),
        hi: hi.clone(),
        value,
        err,
        mass,
        depth,
    })
}

fn err_priority(e: &Float) -> i64 {
    if e.is_zero() {
        i64::MIN
    } else {
        e.get_exp().map(|x| x as i64).unwrap_or(i64::MIN)
    }
}

/// Core adaptive loop over a real parameter interval `[a, b]`.
fn adaptive_core<V: QuadValue, F>(
    f: &F,
    a: &Float,
    b: &Float,
    ctx: &PrecisionContext,
) -> Result<(V, Float, usize)>
where
    F: Fn(&Float) -> Result<V>,
{
    let prec = ctx.bits();
    let mut panels: Vec<Panel<V>> = Vec::new();
    let initial = 4u32;
    let width = (b - a.clone()) / initial;
    for i in 0..initial {
        let lo = a.clone() + width.clone() * i;
        let hi = if i + 1 == initial {
            b.clone()
        } else {
            a.clone() + width.clone() * (i + 1)
        };
        panels.push(eval_panel(f, &lo, &hi, 0, prec)?);
    }

    let mut panels_evaluated = panels.len();
    let panel_budget: usize = 400_000;

    loop {
        let mut total_err = Float::new(prec);
        let mut total_mass = Float::new(prec);
        let mut total_mag = {
            let mut acc = V::zero(prec);
            for p in &panels {
                acc.add_assign(&p.value);
            }
            acc.magnitude()
        };
        for p in &panels {
            total_err += &p.err;
            total_mass += &p.mass;
        }
        // An integrand with heavy cancellation is measured against a small
        // fraction of its total mass instead of the vanishing sum.
        let floor = total_mass * ctx.exp2(-16);
        if floor > total_mag {
            total_mag = floor;
        }
        let target = (ctx.rel_tol() * &total_mag).complete(prec);
        if total_err <= target {
            break;
        }

        // refine the worst panels, a batch per pass
        panels.sort_by_key(|p| err_priority(&p.err));
        let batch = panels.len().min(8).max(1);
        let mut refined = Vec::new();
        for _ in 0..batch {
            let p = panels.pop().unwrap();
            if p.depth >= ctx.max_quad_depth() {
                // Put it back; if it is still the worst we cannot converge.
                let partial = {
                    let mut acc = V::zero(prec);
                    for q in panels.iter().chain(refined.iter()).chain([&p]) {
                        acc.add_assign(&q.value);
                    }
                    acc.magnitude()
                };
                return Err(Error::QuadratureNonConvergence {
                    partial: Box::new(partial),
                    error_bound: Box::new(total_err),
                    panels: panels_evaluated,
                });
            }
            let mid = Float::with_val(prec, &p.lo + &p.hi) / 2u32;
            refined.push(eval_panel(f, &p.lo, &mid, p.depth + 1, prec)?);
            refined.push(eval_panel(f, &mid, &p.hi, p.depth + 1, prec)?);
            panels_evaluated += 2;
        }
        panels.append(&mut refined);
        if panels_evaluated > panel_budget {
            let partial = {
                let mut acc = V::zero(prec);
                for q in &panels {
                    acc.add_assign(&q.value);
                }
                acc.magnitude()
            };
            return Err(Error::QuadratureNonConvergence {
                partial: Box::new(partial),
                error_bound: Box::new(total_err),
                panels: panels_evaluated,
            });
        }
    }

    // Deterministic assembly: order panels by position, reduce pairwise.
    panels.sort_by(|p, q| p.lo.partial_cmp(&q.lo).unwrap());
    let mut values: Vec<V> = panels.iter().map(|p| p.value.clone()).collect();
    while values.len() > 1 {
        let mut next = Vec::with_capacity((values.len() + 1) / 2);
        let mut it = values.into_iter();
        while let Some(mut v) = it.next() {
            if let Some(w) = it.next() {
                v.add_assign(&w);
            }
            next.push(v);
        }
        values = next;
    }
    let value = values.pop().unwrap();
    let mut error = Float::new(prec);
    for p in &panels {
        error += &p.err;
    }
    Ok((value, error, panels.len()))
}

// ---------------------------------------------------------------------------
// Endpoint substitutions
// ---------------------------------------------------------------------------

/// Integrate with declared endpoint behaviour after substituting the
/// singularity away. The substituted parameter runs over a finite interval
/// on which the transformed integrand is analytic.
fn with_endpoints<V: QuadValue, F>(
    f: &F,
    a: &Float,
    b: &Float,
    endpoints: [Endpoint; 2],
    ctx: &PrecisionContext,
) -> Result<(V, Float, usize)>
where
    F: Fn(&Float) -> Result<V>,
{
    let prec = ctx.bits();
    let w = b.clone() - a;
    match endpoints {
        [Endpoint::Regular, Endpoint::Regular] => adaptive_core(f, a, b, ctx),
        [Endpoint::InverseSqrt, Endpoint::Regular] => {
            // x = a + w u^2, dx = 2 w u du
            let g = |u: &Float| -> Result<V> {
                let x = a.clone() + u.clone().square() * &w;
                let jac = Float::with_val(prec, 2) * &w * u;
                let mut out = V::zero(prec);
                out.accumulate(&f(&x)?, &jac);
                Ok(out)
            };
            adaptive_core(&g, &ctx.zero(), &ctx.real(1), ctx)
        }
        [Endpoint::Regular, Endpoint::InverseSqrt] => {
            // x = b - w u^2, dx = -2 w u du, orientation preserved
            let g = |u: &Float| -> Result<V> {
                let x = b.clone() - u.clone().square() * &w;
                let jac = Float::with_val(prec, 2) * &w * u;
                let mut out = V::zero(prec);
                out.accumulate(&f(&x)?, &jac);
                Ok(out)
            };
            adaptive_core(&g, &ctx.zero(), &ctx.real(1), ctx)
        }
        [Endpoint::InverseSqrt, Endpoint::InverseSqrt] => {
            // x = m + h sin(theta)
            let m = (a + b.clone()) / 2u32;
            let h = w.clone() / 2u32;
            let g = |theta: &Float| -> Result<V> {
                let x = m.clone() + theta.clone().sin() * &h;
                let jac = theta.clone().cos() * &h;
                let mut out = V::zero(prec);
                out.accumulate(&f(&x)?, &jac);
                Ok(out)
            };
            let half_pi = ctx.pi() / 2u32;
            adaptive_core(&g, &(-half_pi.clone()), &half_pi, ctx)
        }
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Adaptive integration of a real-valued integrand on a finite interval.
pub fn integrate_real<F>(
    f: F,
    a: &Float,
    b: &Float,
    endpoints: [Endpoint; 2],
    ctx: &PrecisionContext,
) -> Result<QuadratureResult>
where
    F: Fn(&Float) -> Result<Float>,
{
    let (value, error_bound, panels_used) = with_endpoints(&f, a, b, endpoints, ctx)?;
    Ok(QuadratureResult {
        value,
        error_bound,
        panels_used,
    })
}

/// Adaptive integration of a bundle of real-valued integrands sharing one
/// parameter sweep (and typically expensive common subexpressions).
pub fn integrate_real_array<F, const K: usize>(
    f: F,
    a: &Float,
    b: &Float,
    endpoints: [Endpoint; 2],
    ctx: &PrecisionContext,
) -> Result<([Float; K], Float, usize)>
where
    F: Fn(&Float) -> Result<[Float; K]>,
{
    with_endpoints(&f, a, b, endpoints, ctx)
}

/// Adaptive integration of a bundle of complex-valued integrands sharing
/// one real parameter sweep (and typically expensive common subexpressions).
pub fn integrate_real_bundle<F, const K: usize>(
    f: F,
    a: &Float,
    b: &Float,
    endpoints: [Endpoint; 2],
    ctx: &PrecisionContext,
) -> Result<([Complex; K], Float, usize)>
where
    F: Fn(&Float) -> Result<[Complex; K]>,
{
    with_endpoints(&f, a, b, endpoints, ctx)
}

/// Adaptive integration of `f` along the straight segment from `za` to `zb`.
pub fn integrate_segment<F>(
    f: F,
    za: &Complex,
    zb: &Complex,
    endpoints: [Endpoint; 2],
    ctx: &PrecisionContext,
) -> Result<ComplexQuadrature>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    let prec = ctx.bits();
    let dz = zb.clone() - za;
    let g = |u: &Float| -> Result<Complex> {
        let z = za.clone() + (&dz * u).complete((prec, prec));
        Ok(f(&z)? * &dz)
    };
    let (value, error_bound, panels_used) =
        with_endpoints(&g, &ctx.zero(), &ctx.real(1), endpoints, ctx)?;
    Ok(ComplexQuadrature {
        value,
        error_bound,
        panels_used,
    })
}

/// Integration along a polyline; only the outer two endpoints may be singular.
pub fn integrate_polyline<F>(
    f: F,
    points: &[Complex],
    first: Endpoint,
    last: Endpoint,
    ctx: &PrecisionContext,
) -> Result<ComplexQuadrature>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    if points.len() < 2 {
        return Err(Error::BadPath("polyline needs at least two points".into()));
    }
    let prec = ctx.bits();
    let mut value = Complex::new(prec);
    let mut error_bound = Float::new(prec);
    let mut panels_used = 0;
    let n = points.len() - 1;
    for i in 0..n {
        let lo_end = if i == 0 { first } else { Endpoint::Regular };
        let hi_end = if i + 1 == n { last } else { Endpoint::Regular };
        let part = integrate_segment(&f, &points[i], &points[i + 1], [lo_end, hi_end], ctx)?;
        value += part.value;
        error_bound += part.error_bound;
        panels_used += part.panels_used;
    }
    Ok(ComplexQuadrature {
        value,
        error_bound,
        panels_used,
    })
}

/// Counter-clockwise contour integral over the circle `|y - center| = radius`
/// by the trapezoidal rule with doubling, spectrally accurate for integrands
/// analytic in an annulus around the circle.
pub fn integrate_circle<F>(
    f: F,
    center: &Complex,
    radius: &Float,
    ctx: &PrecisionContext,
) -> Result<ComplexQuadrature>
where
    F: Fn(&Complex) -> Result<Complex>,
{
    let prec = ctx.bits();
    let two_pi = ctx.pi() * 2u32;
    let mut m: usize = 32;
    // f(c + r e^{i t}) * i r e^{i t} sampled at t_k = 2 pi k / m
    let sample = |k: usize, m: usize| -> Result<Complex> {
        let t = two_pi.clone() * Float::with_val(prec, k as u32) / Float::with_val(prec, m as u32);
        let dir = Complex::with_val(prec, (t.clone().cos(), t.sin()));
        let y = center.clone() + (&dir * radius).complete((prec, prec));
        let tangent = Complex::with_val(prec, (0, 1)) * dir * radius;
        Ok(f(&y)? * tangent)
    };
    let mut acc = Complex::new(prec);
    let mut mass = Float::new(prec);
    for k in 0..m {
        let v = sample(k, m)?;
        mass += cabs(&v);
        acc += v;
    }
    let mut prev = acc.clone() * (two_pi.clone() / Float::with_val(prec, m as u32));
    loop {
        // points of the doubled rule interleave the old ones
        let m2 = m * 2;
        for k in 0..m {
            let v = sample(2 * k + 1, m2)?;
            mass += cabs(&v);
            acc += v;
        }
        let curr = acc.clone() * (two_pi.clone() / Float::with_val(prec, m2 as u32));
        let diff = cabs(&(curr.clone() - &prev));
        // measured against the circulated mass when the integral cancels
        let mass_scale =
            mass.clone() * (two_pi.clone() / Float::with_val(prec, m2 as u32));
        let mut scale = cabs(&curr);
        let floor = mass_scale * ctx.exp2(-16);
        if floor > scale {
            scale = floor;
        }
        let target = (ctx.rel_tol() * &scale).complete(prec);
        m = m2;
        if diff <= target || m >= 1 << 17 {
            if diff > target {
                return Err(Error::QuadratureNonConvergence {
                    partial: Box::new(cabs(&curr)),
                    error_bound: Box::new(diff),
                    panels: m,
                });
            }
            return Ok(ComplexQuadrature {
                value: curr,
                error_bound: diff,
                panels_used: m,
            });
        }
        prev = curr;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(192)
    }

    #[test]
    fn polynomial_is_exact() {
        let c = ctx();
        let r = integrate_real(
            |x| Ok(x.clone()),
            &c.real(0),
            &c.real(1),
            [Endpoint::Regular, Endpoint::Regular],
            &c,
        )
        .unwrap();
        let err = (r.value - c.real(0.5)).abs();
        assert!(err < c.exp2(-150));
    }

    #[test]
    fn arcsine_weight_gives_pi() {
        // integral of 1/sqrt(1-s^2) over (-1, 1) with declared endpoints
        let c = ctx();
        let r = integrate_real(
            |x| {
                let d = c.real(1) - x.clone().square();
                Ok(c.real(1) / d.sqrt())
            },
            &c.real(-1),
            &c.real(1),
            [Endpoint::InverseSqrt, Endpoint::InverseSqrt],
            &c,
        )
        .unwrap();
        let err = (r.value - c.pi()).abs();
        assert!(err < c.exp2(-150), "err = {err}");
    }

    #[test]
    fn essential_zero_times_gaussian() {
        // integral over (0, inf) of exp(-1/(2x^2) - x^2/2) = sqrt(pi/2) e^{-1},
        // about 0.4610685055; truncated with analytically bounded tails.
        let c = ctx();
        // Lower cutoff: exp(-1/(2 x^2)) < 2^-260 for x < xlo.
        let xlo = {
            let b = c.real(260) * c.real(2).ln();
            (c.real(1) / (b * 2u32)).sqrt()
        };
        let xhi = c.real(40); // exp(-800) tail
        let r = integrate_real(
            |x| {
                let inv = c.real(1) / x.clone().square();
                Ok(((-inv / 2u32) - x.clone().square() / 2u32).exp())
            },
            &xlo,
            &xhi,
            [Endpoint::Regular, Endpoint::Regular],
            &c,
        )
        .unwrap();
        let expect = (c.pi() / 2u32).sqrt() * (-c.real(1)).exp();
        let rel = ((r.value - &expect) / &expect).abs();
        assert!(rel < c.exp2(-90), "rel = {rel}");

        // halving the tolerance cross-check: tighter context agrees
        let c2 = PrecisionContext::new(192).with_rel_tol(c.exp2(-120));
        let r2 = integrate_real(
            |x| {
                let inv = c2.real(1) / x.clone().square();
                Ok(((-inv / 2u32) - x.clone().square() / 2u32).exp())
            },
            &xlo,
            &xhi,
            [Endpoint::Regular, Endpoint::Regular],
            &c2,
        )
        .unwrap();
        let agree = (r2.value - &expect).abs();
        assert!(agree < c.exp2(-110));
    }

    #[test]
    fn additive_over_concatenation() {
        let c = ctx();
        let f = |x: &Float| Ok((x.clone() * 3u32).sin() + x.clone().square());
        let whole = integrate_real(f, &c.real(0), &c.real(2), [Endpoint::Regular; 2], &c).unwrap();
        let left = integrate_real(f, &c.real(0), &c.real(0.7), [Endpoint::Regular; 2], &c).unwrap();
        let right =
            integrate_real(f, &c.real(0.7), &c.real(2), [Endpoint::Regular; 2], &c).unwrap();
        let diff = (whole.value - (left.value + right.value)).abs();
        let budget = whole.error_bound + left.error_bound + right.error_bound;
        assert!(diff <= budget * 4u32 + c.exp2(-180));
    }

    #[test]
    fn doubling_precision_is_consistent() {
        // coarse value stays within the coarse error bound of the fine value
        let coarse = PrecisionContext::new(128);
        let fine = PrecisionContext::new(256);
        let f = |c: &PrecisionContext| {
            let cc = c.clone();
            move |x: &Float| Ok((x.clone().square() + 1u32).ln() * cc.real(1))
        };
        let rc = integrate_real(
            f(&coarse),
            &coarse.real(0),
            &coarse.real(3),
            [Endpoint::Regular; 2],
            &coarse,
        )
        .unwrap();
        let rf = integrate_real(
            f(&fine),
            &fine.real(0),
            &fine.real(3),
            [Endpoint::Regular; 2],
            &fine,
        )
        .unwrap();
        let diff = (rc.value - rf.value).abs();
        assert!(diff <= rc.error_bound * 8u32 + coarse.exp2(-120));
    }

    #[test]
    fn circle_picks_up_residue() {
        // (1/2 pi i) closed integral of 1/y around 0 equals 1
        let c = ctx();
        let r = integrate_circle(
            |y: &Complex| Ok(y.clone().recip()),
            &c.czero(),
            &c.real(0.8),
            &c,
        )
        .unwrap();
        let two_pi_i = Complex::with_val(c.bits(), (0, 1)) * c.pi() * 2u32;
        let got = r.value / two_pi_i;
        let err = cabs(&(got - 1u32));
        assert!(err < c.exp2(-150));
    }

    #[test]
    fn segment_integral_of_entire_function() {
        // integral of e^z from 0 to i pi equals e^{i pi} - 1 = -2
        let c = ctx();
        let za = c.czero();
        let zb = Complex::with_val(c.bits(), (0, c.pi()));
        let r = integrate_segment(
            |z: &Complex| Ok(z.clone().exp()),
            &za,
            &zb,
            [Endpoint::Regular; 2],
            &c,
        )
        .unwrap();
        let err = cabs(&(r.value + 2u32));
        assert!(err < c.exp2(-150));
    }

    #[test]
    fn nan_is_reported() {
        let c = ctx();
        let r = integrate_real(
            |x| Ok((x.clone() - 0.5f64).ln()), // NaN for x < 0.5
            &c.real(0),
            &c.real(1),
            [Endpoint::Regular; 2],
            &c,
        );
        assert!(matches!(r, Err(Error::BadIntegrand { .. })));
    }
}
