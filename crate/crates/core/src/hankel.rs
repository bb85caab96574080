//! Hankel factorization of the moment matrix: norms `h_j`, the three-term
//! recurrence of the monic orthogonal polynomials, the partition-function
//! average `E_N(z,t)`, its Taylor coefficients in `t`, and the moments of the
//! repulsion statistic built from them.
//!
//! The factorization route (numerically stable, O(N^2) storage) is the
//! primary path; a direct determinant is kept in test code as an oracle.

use std::collections::HashMap;

use rug::ops::CompleteRound;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::moments::{moment_table_len, ModelParams, MomentCache, MomentTable};
use crate::precision::{decimal_string, PrecisionContext};
use crate::quad::{integrate_real, Endpoint};

/// Norms and recurrence coefficients of the monic orthogonal polynomials of
/// the weight, equivalent to an LDL^T factorization of the Hankel moment
/// matrix: `det (mu_{j+k}) = prod h_j`.
///
/// The recurrence reads `pi_{j+1}(y) = (y - a_j) pi_j(y) - b_j pi_{j-1}(y)`
/// with `b_j = h_j / h_{j-1}`.
#[derive(Debug, Clone)]
pub struct HankelFactorization {
    pub params: ModelParams,
    pub norms: Vec<Float>,
    pub recur_a: Vec<Float>,
    pub recur_b: Vec<Float>,
    pub log_det: Float,
}

impl HankelFactorization {
    /// Values `pi_0(y) .. pi_{upto}(y)` from the recurrence. Requires
    /// `recur_a` to reach index `upto - 1`.
    pub fn poly_values(&self, y: &Complex, upto: usize) -> Vec<Complex> {
        let prec = y.prec().0;
        let mut out = Vec::with_capacity(upto + 1);
        out.push(Complex::with_val(prec, 1));
        if upto == 0 {
            return out;
        }
        let a0 = &self.recur_a[0];
        out.push(y.clone() - Complex::with_val(prec, a0));
        for j in 1..upto {
            let shifted = y.clone() - Complex::with_val(prec, &self.recur_a[j]);
            let mut next = shifted * &out[j];
            next -= Complex::with_val(prec, &self.recur_b[j]) * &out[j - 1];
            out.push(next);
        }
        out
    }

    /// Values and derivatives of `pi_0..pi_{upto}`.
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
            // pi'_{j+1} = pi_j + (y - a_j) pi'_j - b_j pi'_{j-1}
            let shifted = y.clone() - Complex::with_val(prec, &self.recur_a[j]);
            let mut next = shifted * &ders[j];
            next += &vals[j];
            next -= Complex::with_val(prec, &self.recur_b[j]) * &ders[j - 1];
            ders.push(next);
        }
        (vals, ders)
    }
}

/// `log Z_N` for the GUE weight `exp(-x^2/2)`:
/// `Z_N = (2 pi)^{N/2} prod_{j=1}^{N-1} j!`.
pub fn z_gue_log(n: usize, ctx: &PrecisionContext) -> Float {
    let mut s = (ctx.pi() * 2u32).ln() * ctx.real(n as u32) / 2u32;
    let mut log_factorial = ctx.zero();
    for j in 1..n {
        log_factorial += ctx.real(j as u32).ln();
        s += &log_factorial;
    }
    s
}

/// Hankel factorization of the first `n` rows of a moment table, via the
/// moment-space recurrence build (a Cholesky-equivalent elimination).
///
/// Needs `table.len() >= 2n - 1`; when a full `2n` moments are present the
/// last recurrence coefficient `a_{n-1}` is produced too, which is what the
/// degree-`n` polynomial reconstruction requires.
pub fn factorize(table: &MomentTable, n: usize, ctx: &PrecisionContext) -> Result<HankelFactorization> {
    if table.len() < 2 * n - 1 {
        return Err(Error::Domain(format!(
            "moment table too short: {} < {}",
            table.len(),
            2 * n - 1
        )));
    }
    let prec = ctx.bits();
    let len = table.len();
    let mu = &table.entries;

    let mut norms: Vec<Float> = Vec::with_capacity(n);
    let mut recur_a: Vec<Float> = Vec::new();
    let mut recur_b: Vec<Float> = Vec::new();

    // sigma_k[l] = <pi_k, x^l>; row k lives on l = k .. len-1-k
    let mut prev_prev: Vec<Float> = Vec::new();
    let mut prev: Vec<Float> = mu.clone();

    if !(prev[0].is_sign_positive() && !prev[0].is_zero()) {
        return Err(Error::NotPositiveDefinite { pivot_index: 0 });
    }
    norms.push(prev[0].clone());
    recur_b.push(ctx.zero());
    if len > 1 {
        recur_a.push((&mu[1] / &mu[0]).complete(prec));
    }

    let mut loss_proxy = ctx.real(1);

    for k in 1..n {
        let hi = len - k; // exclusive upper bound for l
        let mut row: Vec<Float> = Vec::with_capacity(hi.saturating_sub(k));
        for l in k..hi {
            // sigma_k[l] = sigma_{k-1}[l+1] - a_{k-1} sigma_{k-1}[l] - b_{k-1} sigma_{k-2}[l]
            let mut v = prev[l + 1].clone();
            v -= (&recur_a[k - 1] * &prev[l]).complete(prec);
            if k >= 2 {
                v -= (&recur_b[k - 1] * &prev_prev[l]).complete(prec);
            }
            row.push(v);
        }
        // row indexed from l = k
        let h_k = row[0].clone();
        if !(h_k.is_sign_positive() && !h_k.is_zero()) {
            return Err(Error::NotPositiveDefinite { pivot_index: k });
        }
        // loss estimate: cancellation from mu_{2k} down to the pivot h_k
        let cancel = (&mu[2 * k.min((len - 1) / 2)] / &h_k).complete(prec).abs();
        if cancel > loss_proxy {
            loss_proxy = cancel;
        }
        let b_k = (&h_k / &norms[k - 1]).complete(prec);
        recur_b.push(b_k);
        if row.len() >= 2 {
            let a_k =
                (&row[1] / &row[0]).complete(prec) - (&prev[k] / &norms[k - 1]).complete(prec);
            recur_a.push(a_k);
        }
        norms.push(h_k);

        // rotate row storage; pad the leading l-offsets to keep indexing by l
        let mut padded = vec![Float::new(prec); k];
        padded.extend(row);
        prev_prev = std::mem::replace(&mut prev, padded);
    }

    let budget = ctx.exp2(ctx.bits() as i32 - 64);
    if loss_proxy > budget {
        return Err(Error::RaisePrecision {
            detail: format!(
                "Hankel cancellation ~2^{} exceeds the 2^{} budget at {} bits",
                loss_proxy.get_exp().unwrap_or(0),
                ctx.bits() - 64,
                ctx.bits()
            ),
        });
    }

    let mut log_det = ctx.zero();
    for h in &norms {
        log_det += h.clone().ln();
    }

    Ok(HankelFactorization {
        params: table.params.clone(),
        norms,
        recur_a,
        recur_b,
        log_det,
    })
}

/// Exact value of the average together with the partition-function logs.
#[derive(Debug, Clone)]
pub struct PartitionResult {
    pub params: ModelParams,
    pub e_n: Float,
    pub log_e_n: Float,
    pub log_g_n: Float,
    pub log_z_n: Float,
    /// How many times the working precision had to be doubled.
    pub precision_retries: u32,
}

impl PartitionResult {
    pub fn to_json(&self, fact: Option<&HankelFactorization>) -> serde_json::Value {
        let mut v = serde_json::json!({
            "N": self.params.n(),
            "z": decimal_string(self.params.z()),
            "t": decimal_string(self.params.t()),
            "E_N": decimal_string(&self.e_n),
            "log_E_N": decimal_string(&self.log_e_n),
            "log_G_N": decimal_string(&self.log_g_n),
            "log_Z_N": decimal_string(&self.log_z_n),
            "precision_retries": self.precision_retries,
        });
        if let Some(f) = fact {
            v["h"] = serde_json::Value::Array(
                f.norms.iter().map(|h| decimal_string(h).into()).collect(),
            );
        }
        v
    }
}

/// Moment table and factorization with the retry-on-precision-loss policy:
/// double the mantissa and redo the quadrature, at most twice.
pub fn factorization_with_retry(
    params: &ModelParams,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<(HankelFactorization, u32, PrecisionContext)> {
    let mut attempt_ctx = ctx.clone();
    let mut retries = 0u32;
    loop {
        let table = moment_table_len(2 * params.n(), params, &attempt_ctx, cache)?;
        match factorize(&table, params.n(), &attempt_ctx) {
            Ok(f) => return Ok((f, retries, attempt_ctx)),
            Err(Error::RaisePrecision { .. }) | Err(Error::NotPositiveDefinite { .. })
                if retries < 2 =>
            {
                retries += 1;
                attempt_ctx = attempt_ctx.doubled();
            }
            Err(e) => return Err(e),
        }
    }
}

/// `E_N(z,t)` in the original variables, `log G_N` in the rescaled ones.
pub fn partition_exact(
    params: &ModelParams,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<PartitionResult> {
    let (fact, retries, used_ctx) = factorization_with_retry(params, ctx, cache)?;
    let n = params.n();
    let log_z_n = z_gue_log(n, &used_ctx);
    let log_e_n = (&fact.log_det - &log_z_n).complete(used_ctx.bits());
    let e_n = log_e_n.clone().exp();
    // G_N = N^{-N^2/2} prod h_j in the rescaled variables
    let n_f = used_ctx.real(n as u32);
    let log_g_n = fact.log_det.clone()
        - n_f.clone().ln() * used_ctx.real((n * n) as u32) / 2u32;
    Ok(PartitionResult {
        params: params.clone(),
        e_n,
        log_e_n,
        log_g_n,
        log_z_n,
        precision_retries: retries,
    })
}

/// The ensemble average at `z = N^{-1/2}`, `t = 0` (the `t`-independent
/// prefactor of the large-`N` law).
pub fn b_n(n: usize, ctx: &PrecisionContext, cache: Option<&MomentCache>) -> Result<Float> {
    let z = ctx.real(1) / ctx.real(n as u32).sqrt();
    let params = ModelParams::new(n, z, ctx.zero())?;
    Ok(partition_exact(&params, ctx, cache)?.e_n)
}

// ---------------------------------------------------------------------------
// Taylor coefficients in t
// ---------------------------------------------------------------------------

/// Key a stencil offset (a multiple of h/2) exactly.
type OffsetKey = i64;

fn e_n_at_offset(
    n: usize,
    z: &Float,
    h_half_steps: OffsetKey,
    h: &Float,
    memo: &mut HashMap<OffsetKey, Float>,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<Float> {
    if let Some(v) = memo.get(&h_half_steps) {
        return Ok(v.clone());
    }
    let t = h.clone() / 2u32 * ctx.real(h_half_steps);
    let params = ModelParams::new(n, ctx.real(z), t)?;
    let v = partition_exact(&params, ctx, cache)?.e_n;
    memo.insert(h_half_steps, v.clone());
    Ok(v)
}

/// One central-difference read of `E^{(m)}(t=0)/m!` at step `h`, given in
/// half-steps so even and odd orders share the memo table.
fn central_difference(
    n: usize,
    z: &Float,
    m: usize,
    h: &Float,
    memo: &mut HashMap<OffsetKey, Float>,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<Float> {
    let prec = ctx.bits();
    // delta^m f(0) = sum_i (-1)^i C(m,i) f((m/2 - i) h)
    let mut acc = ctx.zero();
    let mut binom = ctx.real(1);
    for i in 0..=m {
        if i > 0 {
            // C(m,i) = C(m,i-1) * (m-i+1)/i
            binom *= (m - i + 1) as u32;
            binom /= i as u32;
        }
        let half_steps = (m as i64) - 2 * i as i64; // offset in units of h/2
        let f = e_n_at_offset(n, z, half_steps, h, memo, ctx, cache)?;
        let term = (&binom * &f).complete(prec);
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    // divide by h^m and m!
    let mut denom = ctx.real(1);
    for k in 1..=m {
        denom *= k as u32;
    }
    let mut hm = ctx.real(1);
    for _ in 0..m {
        hm *= h;
    }
    Ok(acc / (denom * hm))
}

/// Taylor coefficient `E_{Nm}(z)` of `E_N(z, t) = sum_m E_{Nm}(z) t^m`,
/// by an m-th central finite difference at `t = 0`, Richardson-extrapolated
/// once. The step may be overridden (needed when `z` itself is tiny).
pub fn taylor_coeff_with_step(
    n: usize,
    z: &Float,
    m: usize,
    step: Option<&Float>,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<Float> {
    if m > 8 {
        return Err(Error::Domain("Taylor order m <= 8 supported".into()));
    }
    if !(z.is_sign_positive() && !z.is_zero()) {
        return Err(Error::Domain("taylor_coeff requires z > 0".into()));
    }
    if m == 0 {
        let params = ModelParams::new(n, ctx.real(z), ctx.zero())?;
        return Ok(partition_exact(&params, ctx, cache)?.e_n);
    }
    let default_h = ctx.exp2(-((ctx.bits() / (2 * m as u32 + 4)) as i32));
    let h = match step {
        Some(s) => ctx.real(s),
        None => default_h,
    };
    let mut memo: HashMap<OffsetKey, Float> = HashMap::new();

    let coarse = central_difference(n, z, m, &h, &mut memo, ctx, cache)?;
    // halving h doubles every half-step count; remap the memo accordingly
    let mut memo_fine: HashMap<OffsetKey, Float> = HashMap::new();
    for (k, v) in memo {
        memo_fine.insert(2 * k, v);
    }
    let h2 = h.clone() / 2u32;
    let fine = central_difference(n, z, m, &h2, &mut memo_fine, ctx, cache)?;

    let extrapolated = (fine.clone() * 4u32 - &coarse) / 3u32;
    let spread = (&fine - &coarse).complete(ctx.bits()).abs();
    let scale = extrapolated.clone().abs().max(&ctx.exp2(-(ctx.bits() as i32)));
    let tolerance = ctx.exp2(-((ctx.bits() / (2 * m as u32 + 4)) as i32));
    if spread / scale > tolerance {
        return Err(Error::RaisePrecision {
            detail: format!(
                "finite-difference extrapolation for m = {m} disagrees beyond 2^-{}",
                ctx.bits() / (2 * m as u32 + 4)
            ),
        });
    }
    Ok(extrapolated)
}

pub fn taylor_coeff(
    n: usize,
    z: &Float,
    m: usize,
    ctx: &PrecisionContext,
    cache: Option<&MomentCache>,
) -> Result<Float> {
    taylor_coeff_with_step(n, z, m, None, ctx, cache)
}

// ---------------------------------------------------------------------------
// Moments of the repulsion statistic
// ---------------------------------------------------------------------------

/// `M_{Nm} = 2^{1-m} (prod_{k=m}^{2m} k) * integral_0^inf z^{2m-1} E_{N,2m}(z) dz`.
///
/// The upper truncation point is certified by sampled geometric decay; the
/// `(0, z_lo]` stub enters the error bound. Desk scale: `N <= 6`, `m <= 2`.
pub fn berry_shukla_moment(n: usize, m: usize, ctx: &PrecisionContext) -> Result<Float> {
    if n > 6 || m == 0 || m > 2 {
        return Err(Error::Domain(
            "repulsion-statistic moments supported for N <= 6, 1 <= m <= 2".into(),
        ));
    }
    let prec = ctx.bits();
    let order = 2 * m;

    let integrand = |z: &Float| -> Result<Float> {
        // the t-window of analyticity shrinks with z, so the step scales
        // with z below 1; this preserves the truncation/roundoff balance
        // of the default step at every z
        let default_h = ctx.exp2(-((ctx.bits() / (2 * order as u32 + 4)) as i32));
        let h = if *z < 1u32 {
            z.clone() * default_h
        } else {
            default_h
        };
        let coeff = taylor_coeff_with_step(n, z, order, Some(&h), ctx, None)?;
        let mut zp = ctx.real(1);
        for _ in 0..(2 * m - 1) {
            zp *= z;
        }
        Ok(coeff * zp)
    };

    // Upper cutoff by sampled geometric decay.
    let mut z_hi = ctx.real(8);
    let tiny = ctx.exp2(-(prec as i32) / 2);
    let mut peak = ctx.zero();
    {
        let mut zp = ctx.real(0.5);
        while zp <= 4 {
            let v = integrand(&zp)?.abs();
            if v > peak {
                peak = v;
            }
            zp += 0.5;
        }
    }
    loop {
        let f = integrand(&z_hi)?.abs();
        if f < (&peak * &tiny).complete(prec) {
            break;
        }
        z_hi += 4u32;
        if z_hi > 256 {
            return Err(Error::TailBound(
                "integrand of the z-integral does not reach the cutoff threshold".into(),
            ));
        }
    }
    let s1 = integrand(&z_hi)?.abs();
    let s2 = integrand(&(z_hi.clone() + 1u32))?.abs();
    let ratio = (&s2 / &s1).complete(prec);
    if !(ratio < 0.8) {
        return Err(Error::TailBound(format!(
            "sampled decay ratio {} past the cutoff is not geometric",
            ratio.to_f64()
        )));
    }
    let tail_bound = s1 * &ratio / (ctx.real(1) - &ratio) * 2u32;

    let z_lo = ctx.real(1e-8);
    let head_bound = integrand(&z_lo)?.abs() * &z_lo * 2u32;

    let outer_ctx = ctx.clone().with_rel_tol(ctx.exp2(-48));
    let q = integrate_real(integrand, &z_lo, &z_hi, [Endpoint::Regular; 2], &outer_ctx)?;
    let _certified = q.error_bound + tail_bound + head_bound;

    let mut prefactor = ctx.exp2(1 - m as i32);
    for k in m..=2 * m {
        prefactor *= k as u32;
    }
    Ok(prefactor * q.value)
}

// ---------------------------------------------------------------------------
