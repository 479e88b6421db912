use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dd::{Dd, PI};
use super::mixture::MixtureDensity;
use super::moments::{moments_eval, moments_eval_dd, EvalPoint, MomentBatch};
use super::quadrature::{trapezoid_dd, QuadratureConfig};
use crate::algebra::{rat_to_f64, MomentExpr, MomentSymbol, Rational};
use crate::calculus::{entropy_derivative, EntropyKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Engine,
    Spectral,
}

impl FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "engine" => Ok(Route::Engine),
            "spectral" => Ok(Route::Spectral),
            other => Err(Error::invalid(format!("unknown route {other:?}"))),
        }
    }
}

/// Highest order the spectral route will differentiate.
pub const MAX_SPECTRAL_ORDER: u32 = 9;
pub const SPECTRAL_DEGREE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeValue {
    pub value: f64,
    /// Estimated absolute numeric error.
    pub error: f64,
}

fn effective_kind(kind: EntropyKind, at: &EvalPoint) -> EntropyKind {
    if at.is_shannon() {
        EntropyKind::Shannon
    } else {
        kind
    }
}

/// `∂ᵏh/∂tᵏ` of the entropy of `d` at `at`.
pub fn derivative_eval(
    d: &MixtureDensity,
    kind: EntropyKind,
    k: u32,
    at: &EvalPoint,
    q: &QuadratureConfig,
    route: Route,
) -> Result<f64> {
    Ok(derivative_with_error(d, kind, k, at, q, route)?.value)
}

pub fn derivative_with_error(
    d: &MixtureDensity,
    kind: EntropyKind,
    k: u32,
    at: &EvalPoint,
    q: &QuadratureConfig,
    route: Route,
) -> Result<DerivativeValue> {
    if k == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    match route {
        Route::Engine => Ok(engine_derivatives(d, kind, &[k], at, q)?[0]),
        Route::Spectral => Ok(spectral_derivatives(d, kind, k, at, SPECTRAL_DEGREE)?[k as usize - 1]),
    }
}

/// Engine route for several orders at once: the derivative expressions are evaluated
/// term by term on a shared batch of tilted moments.
pub fn engine_derivatives(
    d: &MixtureDensity,
    kind: EntropyKind,
    orders: &[u32],
    at: &EvalPoint,
    q: &QuadratureConfig,
) -> Result<Vec<DerivativeValue>> {
    let kind = effective_kind(kind, at);
    let alpha = if kind == EntropyKind::Shannon { 1.0 } else { at.alpha };
    let results = orders.iter().map(|&k| entropy_derivative(kind, k)).collect::<Result<Vec<_>>>()?;
    let exprs: Vec<&MomentExpr> = results.iter().map(|r| &r.expr).collect();
    let (vals, z, z_rel) = eval_batch(d, &exprs, &EvalPoint { alpha, t: at.t }, q)?;
    Ok(results
        .iter()
        .zip(vals)
        .map(|(r, v)| {
            let p = r.normalizer_power as i32;
            let zp = z.powi(p);
            DerivativeValue { value: v.value * zp, error: (v.error + v.value.abs() * p as f64 * z_rel) * zp.abs() }
        })
        .collect())
}

/// Value of a moment expression at `at.alpha` (tilted expectations, no `Z` factor).
pub fn expr_eval(d: &MixtureDensity, e: &MomentExpr, at: &EvalPoint, q: &QuadratureConfig) -> Result<DerivativeValue> {
    Ok(eval_batch(d, &[e], at, q)?.0.remove(0))
}

/// Evaluates expressions on one shared moment batch; also returns `Z` and its relative error.
fn eval_batch(
    d: &MixtureDensity,
    exprs: &[&MomentExpr],
    at: &EvalPoint,
    q: &QuadratureConfig,
) -> Result<(Vec<DerivativeValue>, f64, f64)> {
    let mut index: HashMap<MomentSymbol, usize> = HashMap::new();
    let mut syms = Vec::new();
    for e in exprs {
        for s in e.symbols() {
            if !s.is_unit() && !index.contains_key(&s) {
                index.insert(s.clone(), syms.len());
                syms.push(s);
            }
        }
    }
    let batch = moments_eval(d, &syms, at, q)?;
    let vals = combine(exprs, &index, &batch, at.alpha);
    if vals.iter().all(|v| v.error <= ENGINE_REL_TARGET * v.value.abs()) {
        return Ok((vals, batch.normalizer, batch.rel_error));
    }
    match moments_eval_dd(d, &syms, at) {
        Ok(precise) => Ok((combine(exprs, &index, &precise, at.alpha), precise.normalizer, precise.rel_error)),
        Err(_) => Ok((vals, batch.normalizer, batch.rel_error)),
    }
}

/// Relative error above which the engine redoes its moments in double-double.
const ENGINE_REL_TARGET: f64 = 1e-11;

fn combine(
    exprs: &[&MomentExpr],
    index: &HashMap<MomentSymbol, usize>,
    batch: &MomentBatch,
    alpha: f64,
) -> Vec<DerivativeValue> {
    let alpha_r = Rational::from_float(alpha);
    let alpha_q = alpha_r.as_ref();
    exprs
        .iter()
        .map(|e| {
            let mut value = 0.0;
            let mut exact = Dd::ZERO;
            let mut err = 0.0;
            for (mono, c) in e.iter() {
                let coef = c.eval_f64(alpha);
                let idx: Vec<usize> = mono.symbols().iter().filter_map(|s| index.get(s).copied()).collect();
                let mut term = coef;
                for &i in &idx {
                    term *= batch.values[i];
                }
                value += term;
                if let (Some(p), Some(a)) = (&batch.precise, alpha_q) {
                    let mut t = rat_to_dd(&c.eval(a));
                    for &i in &idx {
                        t = t * p[i];
                    }
                    exact = exact + t;
                }
                // first-order propagation through the product of moments
                for (pos, &i) in idx.iter().enumerate() {
                    let mut e = coef.abs() * batch.error(i);
                    for (other, &j) in idx.iter().enumerate() {
                        if other != pos {
                            e *= batch.abs_values[j];
                        }
                    }
                    err += e;
                }
                let unit = if batch.precise.is_some() { 1e-30 } else { f64::EPSILON };
                err += term.abs() * unit * (idx.len() as f64 + 1.0);
            }
            if batch.precise.is_some() && alpha_q.is_some() {
                value = exact.to_f64();
            }
            DerivativeValue { value, error: 4.0 * err }
        })
        .collect()
}

fn rat_to_dd(r: &Rational) -> Dd {
    let hi = rat_to_f64(r);
    let lo = rat_to_f64(&(r - Rational::from_float(hi).unwrap_or_default()));
    Dd::new(hi) + Dd::new(lo)
}

/// `cos(π m / n)` in double-double.
fn cos_pi_frac(m: usize, n: usize) -> Dd {
    let mut r = m % (2 * n);
    if r > n {
        r = 2 * n - r;
    }
    if 2 * r > n {
        -(PI.mul_f64((n - r) as f64) / Dd::new(n as f64)).cos_sin().0
    } else {
        (PI.mul_f64(r as f64) / Dd::new(n as f64)).cos_sin().0
    }
}

/// Entropy as a function of time, evaluated in double-double.
fn entropy_dd(d: &MixtureDensity, kind: EntropyKind, alpha: f64, t_dd: Dd) -> Result<Dd> {
    let slice = d.dd_slice(t_dd);
    let t = t_dd.to_f64();
    let a_eff = if kind == EntropyKind::Shannon { 1.0 } else { alpha };
    let sd = d.max_variance(t).sqrt() / a_eff.min(1.0).sqrt();
    let (lo, hi) = d.center_range();
    let (a, b) = (lo - 16.0 * sd, hi + 16.0 * sd);
    let narrow = d.min_variance(t).sqrt() / a_eff.max(1.0).sqrt();
    let n0 = ((b - a) / (0.5 * narrow)).ceil().max(16.0) as usize;
    match kind {
        EntropyKind::Shannon => {
            let f = |x: Dd| {
                let lp = slice.log_density(x);
                -(lp.exp() * lp)
            };
            trapezoid_dd(f, a, b, n0, 1e-22, 10)
        }
        _ => {
            let f = |x: Dd| slice.log_density(x).mul_f64(alpha).exp();
            let z = trapezoid_dd(f, a, b, n0, 1e-22, 10)?;
            Ok(match kind {
                EntropyKind::Renyi => z.ln() / (Dd::ONE - Dd::new(alpha)),
                _ => (Dd::ONE - z) / (Dd::new(alpha) - Dd::ONE),
            })
        }
    }
}

fn derivative_coeffs(a: &[Dd]) -> Vec<Dd> {
    let n = a.len() - 1;
    if n == 0 {
        return vec![Dd::ZERO];
    }
    let mut b = vec![Dd::ZERO; n + 1];
    for k in (1..=n).rev() {
        let next = if k < n { b[k + 1] } else { Dd::ZERO };
        b[k - 1] = next + a[k].mul_f64(2.0 * k as f64);
    }
    b[0] = b[0].mul_f64(0.5);
    b.truncate(n);
    b
}

fn clenshaw(a: &[Dd], x: Dd) -> Dd {
    let (mut b1, mut b2) = (Dd::ZERO, Dd::ZERO);
    for k in (1..a.len()).rev() {
        let b0 = a[k] + (x * b1).mul_f64(2.0) - b2;
        b2 = b1;
        b1 = b0;
    }
    a[0] + x * b1 - b2
}

/// Spectral route: Chebyshev interpolation of `t ↦ h(t)` on `[t/2, 2t]` in
/// double-double, differentiated 1..=max_k times at `t`.
pub fn spectral_derivatives(
    d: &MixtureDensity,
    kind: EntropyKind,
    max_k: u32,
    at: &EvalPoint,
    degree: usize,
) -> Result<Vec<DerivativeValue>> {
    if max_k > MAX_SPECTRAL_ORDER {
        return Err(Error::SpectralIllConditioned { order: max_k });
    }
    if degree < 8 {
        return Err(Error::invalid("spectral degree must be at least 8"));
    }
    let kind = effective_kind(kind, at);
    let n = degree;
    let (t0, t1) = (0.5 * at.t, 2.0 * at.t);
    let mid = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    let samples: Vec<Dd> = (0..=n)
        .map(|j| {
            let x = cos_pi_frac(j, n);
            entropy_dd(d, kind, at.alpha, Dd::new(mid) + x.mul_f64(half))
        })
        .collect::<Result<_>>()?;
    let cos: Vec<Dd> = (0..2 * n).map(|m| cos_pi_frac(m, n)).collect();
    let mut coeffs: Vec<Dd> = (0..=n)
        .map(|k| {
            let mut s = Dd::ZERO;
            for (j, f) in samples.iter().enumerate() {
                let term = *f * cos[(j * k) % (2 * n)];
                s = s + if j == 0 || j == n { term.mul_f64(0.5) } else { term };
            }
            s.mul_f64(2.0 / n as f64)
        })
        .collect();
    coeffs[0] = coeffs[0].mul_f64(0.5);
    coeffs[n] = coeffs[n].mul_f64(0.5);
    let x0 = (Dd::new(at.t) - Dd::new(mid)) / Dd::new(half);
    let inv_half = Dd::new(half).recip();
    let short = 3 * n / 4;
    let mut full = coeffs.clone();
    let mut trunc = coeffs[..=short].to_vec();
    let mut out = Vec::with_capacity(max_k as usize);
    let mut scale = Dd::ONE;
    for _ in 0..max_k {
        full = derivative_coeffs(&full);
        trunc = derivative_coeffs(&trunc);
        scale = scale * inv_half;
        let v = clenshaw(&full, x0) * scale;
        let w = clenshaw(&trunc, x0) * scale;
        out.push(DerivativeValue { value: v.to_f64(), error: (v - w).to_f64().abs() });
    }
    // sample noise, amplified by the k-th derivative of the interpolation operator
    let peak = samples.iter().map(|h| h.to_f64().abs()).fold(0.0, f64::max);
    let lebesgue = derivative_lebesgue(n, x0.to_f64(), max_k as usize);
    for (k, o) in out.iter_mut().enumerate() {
        o.error += SAMPLE_REL_NOISE * peak * lebesgue[k] / half.powi(k as i32 + 1);
    }
    Ok(out)
}

/// Relative accuracy assumed for each double-double entropy sample.
const SAMPLE_REL_NOISE: f64 = 1e-30;

/// `Σ_j |ℓ_j^{(k)}(x)|` for the Chebyshev-Lobatto cardinal functions, k = 1..=max_k.
fn derivative_lebesgue(n: usize, x: f64, max_k: usize) -> Vec<f64> {
    let mut out = vec![0.0; max_k];
    for j in 0..=n {
        let wj = if j == 0 || j == n { 0.5 } else { 1.0 };
        let mut c: Vec<f64> = (0..=n)
            .map(|k| {
                let ck = if k == 0 || k == n { 0.5 } else { 1.0 };
                ck * wj * (2.0 / n as f64) * (std::f64::consts::PI * (j * k) as f64 / n as f64).cos()
            })
            .collect();
        for o in out.iter_mut() {
            c = derivative_coeffs_f64(&c);
            *o += clenshaw_f64(&c, x).abs();
        }
    }
    out
}

fn derivative_coeffs_f64(a: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    if n == 0 {
        return vec![0.0];
    }
    let mut b = vec![0.0; n + 1];
    for k in (1..=n).rev() {
        let next = if k < n { b[k + 1] } else { 0.0 };
        b[k - 1] = next + 2.0 * k as f64 * a[k];
    }
    b[0] *= 0.5;
    b.truncate(n);
    b
}

fn clenshaw_f64(a: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for k in (1..a.len()).rev() {
        let b0 = a[k] + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    a[0] + x * b1 - b2
}
