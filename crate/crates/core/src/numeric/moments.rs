use serde::{Deserialize, Serialize};

use super::dd::Dd;
use super::mixture::MixtureDensity;
use super::quadrature::{integrate_leading, integrate_vec, trapezoid_dd_vec, QuadratureConfig};
use crate::algebra::MomentSymbol;
use crate::calculus::EntropyKind;
use crate::error::{Error, Result};

/// Half-width of the band around α = 1 handled by the Shannon formulas.
pub const SHANNON_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub alpha: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("t must be positive, got {t}")));
        }
        Ok(EvalPoint { alpha, t })
    }

    pub fn is_shannon(&self) -> bool {
        (self.alpha - 1.0).abs() < SHANNON_BAND
    }
}

/// `Z = ∫p^α` and the tilted expectations of a batch of symbols.
#[derive(Clone, Debug)]
pub struct MomentBatch {
    pub normalizer: f64,
    pub values: Vec<f64>,
    /// `E_α[|∏ p̄ₙ^{kₙ}|]`, the scale against which cancellation is measured.
    pub abs_values: Vec<f64>,
    /// Largest relative error estimate over the batch, measured against `∫|integrand|`.
    pub rel_error: f64,
    /// First-order bound on the floating-point rounding in each integrand, integrated
    /// and divided by `Z`.
    pub rounding: Vec<f64>,
    /// Double-double moments, when the batch came from the precise rule.
    pub(crate) precise: Option<Vec<Dd>>,
}

impl MomentBatch {
    /// Absolute error estimate of `values[i]`.
    pub fn error(&self, i: usize) -> f64 {
        self.abs_values[i] * self.rel_error + self.rounding[i]
    }
}

pub(crate) fn domain(d: &MixtureDensity, at: &EvalPoint, radius: f64) -> (f64, f64, usize) {
    let sd = d.max_variance(at.t).sqrt() / at.alpha.min(1.0).sqrt();
    let (lo, hi) = d.center_range();
    let a = lo - radius * sd;
    let b = hi + radius * sd;
    let narrow = d.min_variance(at.t).sqrt() / at.alpha.max(1.0).sqrt();
    let pieces = ((b - a) / narrow).ceil().clamp(8.0, 96.0) as usize;
    (a, b, pieces)
}

/// Fills `out` with `p^α`, then `p^α·∏(pₙ/p)^{kₙ}` for every symbol, then a rounding
/// bound for each of those products.
fn tilted_integrand<'a>(
    d: &'a MixtureDensity,
    at: &EvalPoint,
    syms: &[MomentSymbol],
    max_n: usize,
) -> impl Fn(f64, &mut [f64]) + 'a {
    let at = *at;
    let syms: Vec<Vec<(usize, i32)>> =
        syms.iter().map(|s| s.factors().iter().map(|(n, k)| (*n as usize, *k as i32)).collect()).collect();
    let ns = syms.len();
    move |x, out| {
        let mut v = vec![0.0; max_n + 1];
        let mut b = vec![0.0; max_n + 1];
        let m = d.eval_scaled_bound(x, at.t, &mut v, Some(&mut b));
        let pa = (at.alpha * (m + v[0].ln())).exp();
        out[0] = pa;
        for (i, f) in syms.iter().enumerate() {
            let mut val = pa;
            let mut rnd = 0.0;
            for (j, (n, k)) in f.iter().enumerate() {
                let r = v[*n] / v[0];
                let mut term = pa * *k as f64 * (*n as f64 + 2.0) * (b[*n] / v[0]) * r.abs().powi(k - 1);
                for (jj, (nn, kk)) in f.iter().enumerate() {
                    if jj != j {
                        term *= (v[*nn] / v[0]).abs().powi(*kk);
                    }
                }
                rnd += term;
                val *= r.powi(*k);
            }
            out[i + 1] = val;
            out[ns + 1 + i] = rnd * f64::EPSILON;
        }
    }
}

/// Tilted expectations `E_α[∏ p̄ₙ^{kₙ}]` of several symbols in one adaptive pass.
pub fn moments_eval(
    d: &MixtureDensity,
    syms: &[MomentSymbol],
    at: &EvalPoint,
    q: &QuadratureConfig,
) -> Result<MomentBatch> {
    q.validate()?;
    let max_n = syms.iter().flat_map(|s| s.factors().keys().copied()).max().unwrap_or(0) as usize;
    let f = tilted_integrand(d, at, syms, max_n);
    let ns = syms.len();
    let dim = 2 * ns + 1;
    let mut radius = q.truncation_radius;
    for _ in 0..3 {
        let (a, b, pieces) = domain(d, at, radius);
        let r = integrate_leading(&f, dim, ns + 1, a, b, pieces, q)?;
        if tail_ok(&f, dim, ns + 1, a, b, &r.l1, q) {
            let z = r.values[0];
            let rel_error = (0..=ns).map(|i| r.errors[i] / r.l1[i].max(q.abs_tol)).fold(0.0, f64::max);
            return Ok(MomentBatch {
                normalizer: z,
                values: r.values[1..=ns].iter().map(|v| v / z).collect(),
                abs_values: r.l1[1..=ns].iter().map(|v| v / z).collect(),
                rel_error,
                rounding: r.values[ns + 1..].iter().map(|v| v / z).collect(),
                precise: None,
            });
        }
        radius += 4.0;
    }
    Err(Error::QuadratureNonConvergence { what: "integrand tails do not decay within the truncation radius".into() })
}

/// The neglected tails are bounded by the endpoint values times a Gaussian tail length.
fn tail_ok<F: Fn(f64, &mut [f64])>(
    f: &F,
    dim: usize,
    active: usize,
    a: f64,
    b: f64,
    l1: &[f64],
    q: &QuadratureConfig,
) -> bool {
    let mut fa = vec![0.0; dim];
    let mut fb = vec![0.0; dim];
    f(a, &mut fa);
    f(b, &mut fb);
    let len = (b - a) / (2.0 * q.truncation_radius);
    (0..active).all(|i| (fa[i].abs() + fb[i].abs()) * len <= q.abs_tol.max(q.rel_tol * l1[i]))
}

/// The same batch by a double-double trapezoid rule, for expressions whose cancellation
/// defeats `f64` moments. The rule converges geometrically for these Gaussian-tailed
/// integrands; the domain is the fixed radius-16 window.
pub(crate) fn moments_eval_dd(d: &MixtureDensity, syms: &[MomentSymbol], at: &EvalPoint) -> Result<MomentBatch> {
    let max_n = syms.iter().flat_map(|s| s.factors().keys().copied()).max().unwrap_or(0) as usize;
    let factors: Vec<Vec<(usize, u32)>> =
        syms.iter().map(|s| s.factors().iter().map(|(n, k)| (*n as usize, *k)).collect()).collect();
    let ns = syms.len();
    let slice = d.dd_slice(Dd::new(at.t));
    let alpha = at.alpha;
    let f = |x: Dd, out: &mut [Dd]| {
        let mut v = vec![Dd::ZERO; max_n + 1];
        let m = slice.derivatives_scaled(x, &mut v);
        let pa = ((m + v[0].ln()).mul_f64(alpha)).exp();
        out[0] = pa;
        let inv = v[0].recip();
        let ratios: Vec<Dd> = v.iter().map(|vn| *vn * inv).collect();
        for (i, fs) in factors.iter().enumerate() {
            let mut val = pa;
            for (n, k) in fs {
                val = val * ratios[*n].powi(*k);
            }
            out[i + 1] = val;
            out[ns + 1 + i] = val.abs();
        }
    };
    let (a, b, _) = domain(d, at, 16.0);
    let narrow = d.min_variance(at.t).sqrt() / alpha.max(1.0).sqrt();
    let n0 = ((b - a) / (0.5 * narrow)).ceil().max(16.0) as usize;
    let scale = |t: &[Dd], i: usize| {
        let j = if (1..=ns).contains(&i) { ns + i } else { i };
        t[j].abs().to_f64()
    };
    let (vals, diffs) = trapezoid_dd_vec(f, 2 * ns + 1, ns + 1, a, b, n0, 1e-26, 8, scale)?;
    let z = vals[0];
    let rel_error = (0..=ns).map(|i| diffs[i] / scale(&vals, i).max(f64::MIN_POSITIVE)).fold(1e-30, f64::max);
    let abs_values: Vec<f64> = (0..ns).map(|i| (vals[ns + 1 + i] / z).to_f64()).collect();
    Ok(MomentBatch {
        normalizer: z.to_f64(),
        values: (0..ns).map(|i| (vals[i + 1] / z).to_f64()).collect(),
        rounding: abs_values.iter().map(|a| a * 1e-30).collect(),
        precise: Some((0..ns).map(|i| vals[i + 1] / z).collect()),
        abs_values,
        rel_error,
    })
}

/// `E_α[∏ p̄ₙ^{kₙ}]` for one symbol.
pub fn moment_eval(d: &MixtureDensity, m: &MomentSymbol, at: &EvalPoint, q: &QuadratureConfig) -> Result<f64> {
    if m.is_unit() {
        return Ok(1.0);
    }
    Ok(moments_eval(d, std::slice::from_ref(m), at, q)?.values[0])
}

/// `∫p^α dx`.
pub fn power_integral(d: &MixtureDensity, at: &EvalPoint, q: &QuadratureConfig) -> Result<f64> {
    Ok(moments_eval(d, &[], at, q)?.normalizer)
}

/// Rényi, Tsallis or Shannon entropy by quadrature.
pub fn entropy_eval(d: &MixtureDensity, kind: EntropyKind, at: &EvalPoint, q: &QuadratureConfig) -> Result<f64> {
    if kind == EntropyKind::Shannon || at.is_shannon() {
        return shannon_entropy(d, at.t, q);
    }
    let z = power_integral(d, at, q)?;
    Ok(match kind {
        EntropyKind::Renyi => z.ln() / (1.0 - at.alpha),
        _ => (1.0 - z) / (at.alpha - 1.0),
    })
}

fn shannon_entropy(d: &MixtureDensity, t: f64, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    let at = EvalPoint { alpha: 1.0, t };
    let f = |x: f64, out: &mut [f64]| {
        let mut v = [0.0];
        let m = d.eval_scaled(x, t, &mut v);
        let lp = m + v[0].ln();
        out[0] = -lp.exp() * lp;
    };
    let (a, b, pieces) = domain(d, &at, q.truncation_radius);
    Ok(integrate_vec(f, 1, a, b, pieces, q)?.values[0])
}
