//! The singular weight `w(x) = exp(-z^2/(2x^2) + t/x - x^2/2)` and its power
//! moments, with certified error bounds and a read/write-through file cache.
//!
//! Each moment is integrated separately over the two half-lines; the
//! essential zero at the origin and the Gaussian tail are cut off at points
//! where the integrand is provably below `2^-(bits+64)`, and the discarded
//! tails enter the error bound analytically.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rug::ops::CompleteRound;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{decimal_string, PrecisionContext};
use crate::quad::{integrate_real, integrate_real_array, Endpoint};

/// Matrix dimension and weight parameters in the original (unscaled)
/// variables, with the rescaled `v1 = t/sqrt(N)`, `v2 = (z/N)^2` exposed
/// read-only.
#[derive(Debug, Clone)]
pub struct ModelParams {
    n: usize,
    z: Float,
    t: Float,
}

impl ModelParams {
    pub fn new(n: usize, z: Float, t: Float) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("matrix dimension N must be >= 1".into()));
        }
        if !z.is_finite() || z.is_sign_negative() && !z.is_zero() {
            return Err(Error::Domain("z must be a finite nonnegative real".into()));
        }
        if !t.is_finite() {
            return Err(Error::Domain("t must be finite".into()));
        }
        Ok(ModelParams { n, z, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z(&self) -> &Float {
        &self.z
    }

    pub fn t(&self) -> &Float {
        &self.t
    }

    /// Scaled linear coupling `v1 = t / sqrt(N)`.
    pub fn v1(&self) -> Float {
        let prec = self.t.prec();
        let sqrt_n = Float::with_val(prec, self.n as u32).sqrt();
        self.t.clone() / sqrt_n
    }

    /// Scaled singularity strength `v2 = (z/N)^2`.
    pub fn v2(&self) -> Float {
        let prec = self.z.prec();
        let ratio = self.z.clone() / Float::with_val(prec, self.n as u32);
        ratio.square()
    }

    /// Same parameters with `t` negated.
    pub fn negated_t(&self) -> Self {
        ModelParams {
            n: self.n,
            z: self.z.clone(),
            t: -self.t.clone(),
        }
    }
}

/// Moments `mu_0 .. mu_{2N-2}` of the weight at given parameters.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub params: ModelParams,
    pub entries: Vec<Float>,
    pub error_bounds: Vec<Float>,
}

impl MomentTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self, bits: u32) -> serde_json::Value {
        serde_json::json!({
            "params": {
                "n": self.params.n(),
                "z": decimal_string(self.params.z()),
                "t": decimal_string(self.params.t()),
                "mantissa_bits": bits,
            },
            "entries": self.entries.iter().map(decimal_string).collect::<Vec<_>>(),
            "error_bounds": self.error_bounds.iter().map(decimal_string).collect::<Vec<_>>(),
        })
    }
}

/// Value of the weight at a point. For `z > 0` the essential zero at the
/// origin is extended continuously by 0; underflow below the representable
/// range also yields exactly 0.
pub fn weight_value(x: &Float, params: &ModelParams) -> Result<Float> {
    let prec = x.prec();
    if x.is_zero() {
        if params.z().is_zero() && !params.t().is_zero() {
            return Err(Error::Domain(
                "weight has a genuine pole at x = 0 when z = 0, t != 0".into(),
            ));
        }
        return Ok(Float::new(prec));
    }
    let x2 = x.clone().square();
    let mut expo = -(params.z().clone().square() / (x2.clone() * 2u32));
    expo += (params.t() / x).complete(prec);
    expo -= x2 / 2u32;
    Ok(expo.exp())
}

/// log(2) * (bits + 64): exponent threshold below which the integrand is
/// treated as a certified tail.
fn tail_exponent(ctx: &PrecisionContext) -> Float {
    ctx.real(ctx.bits() + 64) * ctx.real(2).ln()
}

/// One-sided integral `I_j(z, t) = integral_0^inf x^j w(x) dx` with an
/// analytically bounded remainder outside `[x_lo, x_hi]`.
fn half_line_moment(j: usize, z: &Float, t: &Float, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let prec = ctx.bits();
    let big = tail_exponent(ctx);

    let log_integrand = |x: &Float| -> Float {
        let x2 = x.clone().square();
        let mut e = ctx.real(j as u32) * x.clone().ln();
        e -= z.clone().square() / (x2.clone() * 2u32);
        e += (t / x).complete(prec);
        e -= x2 / 2u32;
        e
    };

    // Lower cutoff: for z > 0 solve -z^2/(2x^2) + t_+/x = -B, below which the
    // x^j and Gaussian factors only help (x_lo < 1 in every supported regime,
    // checked below).
    let (x_lo, lower_tail) = if z.is_zero() {
        (ctx.zero(), ctx.zero())
    } else {
        let t_plus = if t.is_sign_positive() && !t.is_zero() {
            ctx.real(t)
        } else {
            ctx.zero()
        };
        let z2 = z.clone().square();
        let disc = (t_plus.clone().square() + (&z2 * &big).complete(prec) * 2u32).sqrt();
        let x_lo = z2 / (t_plus + disc);
        // On (0, x_lo] the exponent is <= -B; bound x^j by max(x_lo, 1)^j.
        let mut cap = ctx.real(&x_lo);
        if cap < 1u32 {
            cap = ctx.real(1);
        }
        let mut bound = (-big.clone()).exp() * &x_lo;
        for _ in 0..j {
            bound *= &cap;
        }
        (x_lo, bound)
    };

    // Upper cutoff: beyond x_hi the log-derivative j/x + z^2/x^3 - t/x^2 - x
    // is <= -x/2, so the integrand decays at least like exp(-(x - x_hi) x_hi / 2).
    let mut x_hi = {
        let mut s = ctx.real(2 * (j as u32 + 2)) + z.clone().square() * 2u32
            + t.clone().abs() * 2u32;
        s = s.sqrt();
        if s < 2u32 {
            s = ctx.real(2);
        }
        s
    };
    loop {
        let lf = log_integrand(&x_hi);
        if lf < -big.clone() {
            break;
        }
        x_hi *= 2u32;
        if x_hi > 1e300 {
            return Err(Error::TailBound(
                "could not locate the Gaussian tail cutoff".into(),
            ));
        }
    }
    let upper_tail = {
        let f_hi = log_integrand(&x_hi).exp();
        f_hi * 2u32 / &x_hi
    };

    let integrand = |x: &Float| -> Result<Float> {
        let x2 = x.clone().square();
        let mut e = -(z.clone().square() / (x2.clone() * 2u32));
        e += (t / x).complete(prec);
        e -= x2 / 2u32;
        let mut v = e.exp();
        if j > 0 {
            v *= power(x, j, prec);
        }
        Ok(v)
    };

    let q = integrate_real(integrand, &x_lo, &x_hi, [Endpoint::Regular; 2], ctx)?;
    let mut err = q.error_bound;
    err += lower_tail;
    err += upper_tail;
    Ok((q.value, err))
}

/// x^j by binary powering at full precision.
fn power(x: &Float, j: usize, prec: u32) -> Float {
    let mut result = Float::with_val(prec, 1);
    let mut base = x.clone();
    let mut e = j;
    while e > 0 {
        if e & 1 == 1 {
            result *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = base.square();
        }
    }
    result
}

/// Bundle width for grouped moment integration: one weight evaluation
/// serves this many consecutive powers.
const MOMENT_CHUNK: usize = 16;

/// Half-line integrals `I_{j0+i}` for `i < count <= MOMENT_CHUNK`, sharing
/// the weight exponential across the powers. Cutoffs are those of the
/// highest power (valid bounds for all lower ones).
fn half_line_moment_chunk(
    j0: usize,
    count: usize,
    z: &Float,
    t: &Float,
    ctx: &PrecisionContext,
) -> Result<Vec<(Float, Float)>> {
    assert!(count >= 1 && count <= MOMENT_CHUNK);
    let prec = ctx.bits();
    let big = tail_exponent(ctx);
    let j_hi = j0 + count - 1;

    let log_integrand = |x: &Float, j: usize| -> Float {
        let x2 = x.clone().square();
        let mut e = ctx.real(j as u32) * x.clone().ln();
        e -= z.clone().square() / (x2.clone() * 2u32);
        e += (t / x).complete(prec);
        e -= x2 / 2u32;
        e
    };

    let (x_lo, lower_tails) = if z.is_zero() {
        (ctx.zero(), vec![ctx.zero(); count])
    } else {
        let t_plus = if t.is_sign_positive() && !t.is_zero() {
            ctx.real(t)
        } else {
            ctx.zero()
        };
        let z2 = z.clone().square();
        let disc = (t_plus.clone().square() + (&z2 * &big).complete(prec) * 2u32).sqrt();
        let x_lo = z2 / (t_plus + disc);
        let mut cap = ctx.real(&x_lo);
        if cap < 1u32 {
            cap = ctx.real(1);
        }
        let base = (-big.clone()).exp() * &x_lo;
        let mut tails = Vec::with_capacity(count);
        let mut f = base.clone();
        for _ in 0..j0 {
            f *= &cap;
        }
        for _ in 0..count {
            tails.push(f.clone());
            f *= &cap;
        }
        (x_lo, tails)
    };

    let mut x_hi = {
        let mut s = ctx.real(2 * (j_hi as u32 + 2)) + z.clone().square() * 2u32
            + t.clone().abs() * 2u32;
        s = s.sqrt();
        if s < 2u32 {
            s = ctx.real(2);
        }
        s
    };
    loop {
        if log_integrand(&x_hi, j_hi) < -big.clone() {
            break;
        }
        x_hi *= 2u32;
        if x_hi > 1e300 {
            return Err(Error::TailBound(
                "could not locate the Gaussian tail cutoff".into(),
            ));
        }
    }
    let upper_tails: Vec<Float> = (0..count)
        .map(|i| log_integrand(&x_hi, j0 + i).exp() * 2u32 / &x_hi)
        .collect();

    let weight_part = |x: &Float| -> Float {
        let x2 = x.clone().square();
        let mut e = -(z.clone().square() / (x2.clone() * 2u32));
        e += (t / x).complete(prec);
        e -= x2 / 2u32;
        e.exp()
    };

    macro_rules! run {
        ($k:expr) => {{
            let (vals, err, _) = integrate_real_array::<_, $k>(
                |x: &Float| {
                    let w = weight_part(x);
                    let mut out: [Float; $k] = std::array::from_fn(|_| Float::new(prec));
                    let mut p = if j0 == 0 {
                        Float::with_val(prec, 1)
                    } else {
                        power(x, j0, prec)
                    };
                    for slot in out.iter_mut() {
                        *slot = (&w * &p).complete(prec);
                        p *= x;
                    }
                    Ok(out)
                },
                &x_lo,
                &x_hi,
                [Endpoint::Regular; 2],
                ctx,
            )?;
            (vals.to_vec(), err)
        }};
    }
    // monomorphize a few widths to keep array sizes static
    let (vals, err) = match count {
        1 => run!(1),
        2 => run!(2),
        4 => run!(4),
        8 => run!(8),
        16 => run!(16),
        c if c < 4 => {
            let (mut v, e) = run!(4);
            v.truncate(c);
            (v, e)
        }
        c if c < 8 => {
            let (mut v, e) = run!(8);
            v.truncate(c);
            (v, e)
        }
        c => {
            let (mut v, e) = run!(16);
            v.truncate(c);
            (v, e)
        }
    };

    Ok(vals
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let mut e = err.clone();
            e += &lower_tails[i.min(lower_tails.len() - 1)];
            e += &upper_tails[i];
            (v, e)
        })
        .collect())
}

/// Certified moment `mu_j = integral x^j w(x) dx` over the whole line.
pub fn moment(j: usize, params: &ModelParams, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    let z = params.z();
    let t = params.t();
    if z.is_zero() && !t.is_zero() {
        return Err(Error::Domain(
            "z = 0 with t != 0: the weight is not integrable at the origin".into(),
        ));
    }
    // mu_j = I_j(z, t) + (-1)^j I_j(z, -t), where I_j is the x > 0 half.
    let (plus, err_plus) = half_line_moment(j, z, t, ctx)?;
    let neg_t = -t.clone();
    let (minus, err_minus) = half_line_moment(j, z, &neg_t, ctx)?;
    let value = if j % 2 == 0 {
        plus + minus
    } else {
        plus - minus
    };
    Ok((value, err_plus + err_minus))
}

/// Moments `mu_0 .. mu_{count-1}`, computed concurrently with deterministic
/// assembly and served through the cache when one is supplied.
pub fn moment_table_len(
    count: usize,
    params: &ModelParams,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<MomentTable> {
    if let Some(c) = cache {
        if let Some(t) = c.load(count, params, ctx) {
            return Ok(t);
        }
    }
    let z = params.z();
    let t = params.t();
    if z.is_zero() && !t.is_zero() {
        return Err(Error::Domain(
            "z = 0 with t != 0: the weight is not integrable at the origin".into(),
        ));
    }
    let neg_t = -t.clone();
    let starts: Vec<usize> = (0..count).step_by(MOMENT_CHUNK).collect();
    let chunks: Vec<Result<(Vec<(Float, Float)>, Vec<(Float, Float)>)>> = starts
        .par_iter()
        .map(|&j0| {
            let width = MOMENT_CHUNK.min(count - j0);
            let plus = half_line_moment_chunk(j0, width, z, t, ctx)?;
            let minus = half_line_moment_chunk(j0, width, z, &neg_t, ctx)?;
            Ok((plus, minus))
        })
        .collect();
    let mut entries = Vec::with_capacity(count);
    let mut error_bounds = Vec::with_capacity(count);
    for (c, &j0) in chunks.into_iter().zip(&starts) {
        let (plus, minus) = c?;
        for (i, ((pv, pe), (mv, me))) in plus.into_iter().zip(minus).enumerate() {
            let v = if (j0 + i) % 2 == 0 { pv + mv } else { pv - mv };
            entries.push(v);
            error_bounds.push(pe + me);
        }
    }
    let table = MomentTable {
        params: params.clone(),
        entries,
        error_bounds,
    };
    if let Some(c) = cache {
        c.store(&table, ctx);
    }
    Ok(table)
}

/// The table of the `2N-1` moments entering the `N x N` Hankel matrix.
pub fn moment_table(
    params: &ModelParams,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<MomentTable> {
    moment_table_len(2 * params.n() - 1, params, ctx, cache)
}

// ---------------------------------------------------------------------------
// File cache
// ---------------------------------------------------------------------------

/// One JSON file per `(count, z, t, mantissa_bits)` key; decimal strings
/// carry full precision through the round trip.
#[derive(Debug, Clone)]
pub struct MomentCache {
    dir: PathBuf,
}

impl MomentCache {
    pub fn new(dir: impl AsRef<Path>) -> Self {
        MomentCache {
            dir: dir.as_ref().to_path_buf(),
        }
    }

    /// Cache rooted at `$SGUE_CACHE_DIR`, defaulting to `./.sgue-cache`.
    pub fn from_env() -> Self {
        let dir = std::env::var("SGUE_CACHE_DIR").unwrap_or_else(|_| ".sgue-cache".into());
        MomentCache::new(dir)
    }

    fn param_hash(params: &ModelParams, ctx: &PrecisionContext) -> u64 {
        // stable hash of the full-precision parameter strings
        let z = decimal_string(params.z());
        let t = decimal_string(params.t());
        let tag = format!("{z}|{t}|{}", ctx.bits());
        let mut h: u64 = 0xcbf29ce484222325;
        for b in tag.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    fn key(&self, count: usize, params: &ModelParams, ctx: &PrecisionContext) -> PathBuf {
        let h = Self::param_hash(params, ctx);
        self.dir.join(format!("moments-{h:016x}-{count}.json"))
    }

    fn load_file(
        &self,
        path: &Path,
        count: usize,
        params: &ModelParams,
        ctx: &PrecisionContext,
    ) -> Option<MomentTable> {
        let text = fs::read_to_string(path).ok()?;
        let v: serde_json::Value = serde_json::from_str(&text).ok()?;
        let entries = v.get("entries")?.as_array()?;
        let bounds = v.get("error_bounds")?.as_array()?;
        if entries.len() < count || bounds.len() < count {
            return None;
        }
        // verify the key fields before trusting the hash
        let p = v.get("params")?;
        if p.get("z")?.as_str()? != decimal_string(params.z())
            || p.get("t")?.as_str()? != decimal_string(params.t())
        {
            return None;
        }
        let mut es = Vec::with_capacity(count);
        let mut bs = Vec::with_capacity(count);
        for (e, b) in entries.iter().zip(bounds).take(count) {
            es.push(ctx.parse_real(e.as_str()?).ok()?);
            bs.push(ctx.parse_real(b.as_str()?).ok()?);
        }
        Some(MomentTable {
            params: params.clone(),
            entries: es,
            error_bounds: bs,
        })
    }

    fn load(&self, count: usize, params: &ModelParams, ctx: &PrecisionContext) -> Option<MomentTable> {
        let exact = self.key(count, params, ctx);
        if let Some(t) = self.load_file(&exact, count, params, ctx) {
            return Some(t);
        }
        // a longer table for the same (z, t, bits) serves any prefix
        let h = Self::param_hash(params, ctx);
        let prefix = format!("moments-{h:016x}-");
        let mut candidates: Vec<(usize, PathBuf)> = fs::read_dir(&self.dir)
            .ok()?
            .flatten()
            .filter_map(|entry| {
                let name = entry.file_name().into_string().ok()?;
                let rest = name.strip_prefix(&prefix)?.strip_suffix(".json")?;
                let stored: usize = rest.parse().ok()?;
                (stored >= count).then_some((stored, entry.path()))
            })
            .collect();
        candidates.sort_unstable_by_key(|(c, _)| *c);
        for (_, path) in candidates {
            if let Some(t) = self.load_file(&path, count, params, ctx) {
                return Some(t);
            }
        }
        None
    }

    fn store(&self, table: &MomentTable, ctx: &PrecisionContext) {
        if fs::create_dir_all(&self.dir).is_err() {
            return;
        }
        let path = self.key(table.len(), &table.params, ctx);
        let _ = fs::write(path, table.to_json(ctx.bits()).to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::bessel_k_half;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(192)
    }

    fn params(n: usize, z: f64, t: f64, c: &PrecisionContext) -> ModelParams {
        ModelParams::new(n, c.real(z), c.real(t)).unwrap()
    }

    #[test]
    fn weight_at_simple_points() {
        let c = ctx();
        // Gaussian point
        let w = weight_value(&c.real(1), &params(1, 0.0, 0.0, &c)).unwrap();
        let expect = (-c.real(0.5)).exp();
        assert!((w - expect).abs() < c.exp2(-180));
        // exponent cancels at (1, 1, 1)
        let w = weight_value(&c.real(1), &params(1, 1.0, 1.0, &c)).unwrap();
        assert!((w - 1u32).abs() < c.exp2(-180));
        // essential zero
        let w = weight_value(&c.real(1e-30), &params(1, 1.0, 0.0, &c)).unwrap();
        assert!(w.is_zero());
        // pole is rejected
        assert!(weight_value(&c.real(0), &params(1, 0.0, 1.0, &c)).is_err());
    }

    #[test]
    fn gaussian_normalization() {
        let c = ctx();
        let (m0, err) = moment(0, &params(1, 0.0, 0.0, &c), &c).unwrap();
        let expect = (c.pi() * 2u32).sqrt();
        assert!((m0 - &expect).abs() < err * 4u32 + c.exp2(-90));
    }

    #[test]
    fn odd_moment_vanishes_at_t_zero() {
        let c = ctx();
        let (m1, err) = moment(1, &params(1, 1.0, 0.0, &c), &c).unwrap();
        assert!(m1.abs() <= err + c.exp2(-90));
    }

    #[test]
    fn bessel_reduction_for_even_moments() {
        // mu_j(z, 0) = 2 z^{(j+1)/2} K_{(j+1)/2}(z) for even j
        let c = ctx();
        let z = c.real(1);
        let p = params(2, 1.0, 0.0, &c);
        for j in [0usize, 2] {
            let (mj, _) = moment(j, &p, &c).unwrap();
            // (j+1)/2 = j/2 + 1/2 for even j, so the order is n + 1/2, n = j/2
            let k = bessel_k_half(j as u32 / 2, &z, &c).unwrap();
            let zp = power(&z, j + 1, c.bits());
            let expect = zp.sqrt() * k * 2u32;
            let rel = ((mj - &expect) / expect).abs();
            assert!(rel < c.rel_tol().clone() * 10u32, "j={j} rel={rel}");
        }
    }

    #[test]
    fn parity_in_t() {
        // mu_j(z, t) = (-1)^j mu_j(z, -t)
        let c = ctx();
        let p = params(1, 1.0, 0.3, &c);
        let q = p.negated_t();
        for j in 0..=8usize {
            let (a, ea) = moment(j, &p, &c).unwrap();
            let (b, eb) = moment(j, &q, &c).unwrap();
            let b = if j % 2 == 0 { b } else { -b };
            let diff = (a - b).abs();
            assert!(diff <= (ea + eb) * 4u32 + c.exp2(-90), "j={j}");
        }
    }

    #[test]
    fn monotone_in_z() {
        let c = ctx();
        let (a, _) = moment(0, &params(1, 0.25, 0.0, &c), &c).unwrap();
        let (b, _) = moment(0, &params(1, 0.5, 0.0, &c), &c).unwrap();
        let (d, _) = moment(0, &params(1, 1.0, 0.0, &c), &c).unwrap();
        assert!(a > b && b > d);
    }

    #[test]
    fn rejects_z_zero_with_t() {
        let c = ctx();
        assert!(moment(0, &params(1, 0.0, 0.5, &c), &c).is_err());
    }

    #[test]
    fn taylor_cross_check_small_t() {
        // mu_0(z, t) ~ sum_k t^k/k! mu_{-k}(z, 0); negative-index moments
        // via the same Bessel reduction with K_{-v} = K_v.
        let c = ctx();
        let z = c.real(1);
        let t = c.real(0.125);
        let p = ModelParams::new(1, z.clone(), t.clone()).unwrap();
        let (m, _) = moment(0, &p, &c).unwrap();

        // mu_{-k}(1, 0) = 2 K_{(k-1)/2}(1) for even k (K_{-v} = K_v and the
        // z-power drops out at z = 1); odd negative moments vanish at t = 0.
        // (k-1)/2 is the half-integer order n + 1/2 with n = k/2 - 1.
        let mut series = c.zero();
        let mut factorial = c.real(1);
        for k in 0..=12u32 {
            if k > 0 {
                factorial *= k;
            }
            if k % 2 == 1 {
                continue;
            }
            let n = if k == 0 { 0 } else { k / 2 - 1 };
            let kv = bessel_k_half(n, &z, &c).unwrap();
            let term = kv * 2u32 * power(&t, k as usize, c.bits()) / &factorial;
            series += term;
        }
        let rel = ((m - &series) / series).abs();
        // truncation of the Taylor series dominates
        assert!(rel < c.real(1e-10), "rel = {rel}");
    }
}
