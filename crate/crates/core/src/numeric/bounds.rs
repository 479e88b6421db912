use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::derivative::{
    engine_derivatives, spectral_derivatives, DerivativeValue, MAX_SPECTRAL_ORDER, SPECTRAL_DEGREE,
};
use super::mixture::MixtureDensity;
use super::moments::{domain, entropy_eval, EvalPoint, SHANNON_BAND};
use super::quadrature::{integrate_vec, QuadratureConfig};
use crate::calculus::EntropyKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyBounds {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl EntropyBounds {
    /// Whether `h` lies in `[lower − tol, upper + tol]`.
    pub fn contains(&self, h: f64, tol: f64) -> bool {
        h >= self.lower - tol && self.upper.is_none_or(|u| h <= u + tol)
    }
}

fn check_args(alpha: f64, t: f64, sigma2: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("sigma2 must be nonnegative, got {sigma2}")));
    }
    Ok(())
}

/// `½log(2πt) + log α / (2(α−1))`, with the limit ½ at α = 1.
fn gaussian_renyi(alpha: f64, v: f64) -> f64 {
    let c = if (alpha - 1.0).abs() < SHANNON_BAND { 0.5 } else { alpha.ln() / (2.0 * (alpha - 1.0)) };
    0.5 * (2.0 * std::f64::consts::PI * v).ln() + c
}

/// Bounds on the Rényi entropy of `X + √t Z` where `X` has variance `sigma2`.
///
/// The lower bound is the Gaussian of variance `t`. Above α = 1 the upper bound is the
/// Gaussian of variance `t + σ²` evaluated at the same α; for 1/3 < α < 1 it is the
/// Pearson type VII law of that variance. At α = 1 both reduce to `½log(2πe(t+σ²))`.
pub fn entropy_bounds(alpha: f64, t: f64, sigma2: f64) -> Result<EntropyBounds> {
    check_args(alpha, t, sigma2)?;
    let v = t + sigma2;
    let lower = gaussian_renyi(alpha, t);
    let upper = if alpha >= 1.0 - SHANNON_BAND {
        Some(gaussian_renyi(alpha, v))
    } else if alpha > 1.0 / 3.0 {
        Some(pearson_vii_renyi(alpha, v))
    } else {
        None
    };
    Ok(EntropyBounds { lower, upper })
}

/// Rényi entropy of the Pearson type VII law with variance `v`, for 1/3 < α < 1.
fn pearson_vii_renyi(alpha: f64, v: f64) -> f64 {
    let om = 1.0 - alpha;
    (2.0 * alpha / (3.0 * alpha - 1.0)).ln() / om + ln_gamma((1.0 + alpha) / (2.0 * om)) - ln_gamma(1.0 / om)
        + 0.5 * (std::f64::consts::PI * (3.0 * alpha - 1.0) * v / om).ln()
}

/// `½log(2πe(t+σ²))`: Shannon entropy of the variance-matched Gaussian. Since the Rényi
/// entropy decreases in α, this bounds every α ≥ 1.
pub fn shannon_variance_bound(t: f64, sigma2: f64) -> Result<f64> {
    check_args(1.0, t, sigma2)?;
    Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * (t + sigma2)).ln())
}

/// The two sides of `∂ᵏ(1 − ∫p²)/∂tᵏ = (−1)^{k−1}∫(∂ᵏp/∂xᵏ)²`.
pub fn tsallis2_identity_check(d: &MixtureDensity, k: u32, t: f64, q: &QuadratureConfig) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    let at = EvalPoint::new(2.0, t)?;
    let lhs = engine_derivatives(d, EntropyKind::Tsallis, &[k], &at, q)?[0].value;
    let n = k as usize;
    let (a, b, pieces) = domain(d, &at, q.truncation_radius);
    let f = |x: f64, out: &mut [f64]| {
        let mut v = vec![0.0; n + 1];
        let m = d.eval_scaled(x, t, &mut v);
        out[0] = (v[n] * m.exp()).powi(2);
    };
    let sq = integrate_vec(f, 1, a, b, pieces, q)?.values[0];
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    Ok((lhs, sign * sq))
}

/// `(e^{h_α})'' = e^{h_α}(h'' + (h')²)` in t, the concavity target for the square root
/// of the Rényi entropy power.
pub fn entropy_power_curvature(
    d: &MixtureDensity,
    alpha: f64,
    t: f64,
    q: &QuadratureConfig,
) -> Result<DerivativeValue> {
    let at = EvalPoint::new(alpha, t)?;
    let eng = engine_derivatives(d, EntropyKind::Renyi, &[1, 2], &at, q)?;
    let spec = spectral_derivatives(d, EntropyKind::Renyi, 2.min(MAX_SPECTRAL_ORDER), &at, SPECTRAL_DEGREE)?;
    let pick = |i: usize| if spec[i].error < eng[i].error { spec[i] } else { eng[i] };
    let (h1, h2) = (pick(0), pick(1));
    let e = entropy_eval(d, EntropyKind::Renyi, &at, q)?.exp();
    let value = e * (h2.value + h1.value * h1.value);
    let error = e * (h2.error + 2.0 * h1.value.abs() * h1.error) + value.abs() * 1e-12;
    Ok(DerivativeValue { value, error })
}

/// `e^{h(t+δ)} − 2e^{h(t)} + e^{h(t−δ)}` for the Rényi entropy.
pub fn entropy_power_second_difference(
    d: &MixtureDensity,
    alpha: f64,
    t: f64,
    delta: f64,
    q: &QuadratureConfig,
) -> Result<f64> {
    if !(delta > 0.0 && delta < t) {
        return Err(Error::invalid("step must lie in (0, t)"));
    }
    let e = |s: f64| -> Result<f64> { Ok(entropy_eval(d, EntropyKind::Renyi, &EvalPoint::new(alpha, s)?, q)?.exp()) };
    Ok(e(t + delta)? - 2.0 * e(t)? + e(t - delta)?)
}
