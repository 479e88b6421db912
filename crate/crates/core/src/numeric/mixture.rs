use serde::{Deserialize, Serialize};

use super::dd::{Dd, PI};
use crate::error::{Error, Result};

/// Gaussian mixture under the heat flow: component j has variance `initial_variances[j] + t`.
///
/// A zero initial variance is a point mass at time 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureDensity {
    pub weights: Vec<f64>,
    pub centers: Vec<f64>,
    pub initial_variances: Vec<f64>,
}

impl MixtureDensity {
    pub fn new(weights: Vec<f64>, centers: Vec<f64>, initial_variances: Vec<f64>) -> Result<Self> {
        let d = MixtureDensity { weights, centers, initial_variances };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 {
            return Err(Error::invalid("mixture needs at least one component"));
        }
        if self.centers.len() != n || self.initial_variances.len() != n {
            return Err(Error::invalid("weights, centers and initial_variances differ in length"));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("weights must be positive"));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights must sum to 1"));
        }
        if self.centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("centers must be finite"));
        }
        if self.initial_variances.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("initial variances must be nonnegative"));
        }
        Ok(())
    }

    pub fn gaussian(center: f64, variance: f64) -> Self {
        MixtureDensity { weights: vec![1.0], centers: vec![center], initial_variances: vec![variance] }
    }

    /// `½(δ₁ + δ₋₁)`.
    pub fn two_point() -> Self {
        MixtureDensity { weights: vec![0.5, 0.5], centers: vec![1.0, -1.0], initial_variances: vec![0.0, 0.0] }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: MixtureDensity = serde_json::from_str(s).map_err(|e| Error::parse(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Variance of the time-0 law.
    pub fn variance(&self) -> f64 {
        let mean: f64 = self.weights.iter().zip(&self.centers).map(|(w, c)| w * c).sum();
        self.weights
            .iter()
            .zip(&self.centers)
            .zip(&self.initial_variances)
            .map(|((w, c), s)| w * ((c - mean).powi(2) + s))
            .sum()
    }

    pub(crate) fn max_variance(&self, t: f64) -> f64 {
        self.initial_variances.iter().fold(0.0f64, |m, s| m.max(s + t))
    }

    pub(crate) fn min_variance(&self, t: f64) -> f64 {
        self.initial_variances.iter().fold(f64::INFINITY, |m, s| m.min(s + t))
    }

    pub(crate) fn center_range(&self) -> (f64, f64) {
        let lo = self.centers.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// `∂ⁿp/∂xⁿ` for n = 0..out.len() scaled by `e^{-M}`; returns `M`.
    ///
    /// Scaling keeps ratios `pₙ/p` finite far in the tails.
    pub(crate) fn eval_scaled(&self, x: f64, t: f64, out: &mut [f64]) -> f64 {
        self.eval_scaled_bound(x, t, out, None)
    }

    /// As [`Self::eval_scaled`], optionally also filling `bound[n]` with a scale for the
    /// rounding error of `out[n]`: the sum of absolute component contributions, with the
    /// Hermite recurrence run on absolute values.
    pub(crate) fn eval_scaled_bound(&self, x: f64, t: f64, out: &mut [f64], mut bound: Option<&mut [f64]>) -> f64 {
        let logs: Vec<f64> = (0..self.len())
            .map(|j| {
                let v = self.initial_variances[j] + t;
                let u = x - self.centers[j];
                self.weights[j].ln() - 0.5 * (2.0 * std::f64::consts::PI * v).ln() - u * u / (2.0 * v)
            })
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.iter_mut().for_each(|o| *o = 0.0);
        if let Some(b) = bound.as_deref_mut() {
            b.iter_mut().for_each(|o| *o = 0.0);
        }
        let mut he = vec![0.0; out.len()];
        let mut he_abs = vec![0.0; out.len()];
        for j in 0..self.len() {
            let s = (logs[j] - m).exp();
            if s == 0.0 {
                continue;
            }
            let v = self.initial_variances[j] + t;
            let sd = v.sqrt();
            let u = (x - self.centers[j]) / sd;
            hermite(u, &mut he);
            let mut f = s;
            for (n, o) in out.iter_mut().enumerate() {
                *o += f * he[n];
                f *= -1.0 / sd;
            }
            if let Some(b) = bound.as_deref_mut() {
                hermite_abs(u.abs(), &mut he_abs);
                let mut f = s;
                for (n, o) in b.iter_mut().enumerate() {
                    *o += f * he_abs[n];
                    f /= sd;
                }
            }
        }
        m
    }

    pub(crate) fn dd_slice(&self, t: Dd) -> DdSlice {
        let two_pi = PI.mul_f64(2.0);
        let comps = (0..self.len())
            .map(|j| {
                let v = Dd::new(self.initial_variances[j]) + t;
                let lw = Dd::new(self.weights[j]).ln();
                DdComponent {
                    center: Dd::new(self.centers[j]),
                    log_norm: lw - (two_pi * v).ln().mul_f64(0.5),
                    inv_two_v: (v.mul_f64(2.0)).recip(),
                    inv_sd: v.sqrt().recip(),
                }
            })
            .collect();
        DdSlice { comps }
    }
}

/// Probabilists' Hermite polynomials He₀..He_{n-1} at u.
fn hermite(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = u;
    }
    for n in 1..out.len().saturating_sub(1) {
        out[n + 1] = u * out[n] - n as f64 * out[n - 1];
    }
}

/// Majorant of `|He_n|` and of the rounding growth in its recurrence.
fn hermite_abs(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = u;
    }
    for n in 1..out.len().saturating_sub(1) {
        out[n + 1] = u * out[n] + n as f64 * out[n - 1];
    }
}

pub(crate) struct DdComponent {
    center: Dd,
    log_norm: Dd,
    inv_two_v: Dd,
    inv_sd: Dd,
}

/// The mixture at one fixed time, prepared for double-double evaluation.
pub(crate) struct DdSlice {
    comps: Vec<DdComponent>,
}

impl DdSlice {
    pub fn log_density(&self, x: Dd) -> Dd {
        let logs: Vec<Dd> = self
            .comps
            .iter()
            .map(|c| {
                let u = x - c.center;
                c.log_norm - u.sqr() * c.inv_two_v
            })
            .collect();
        let m = logs.iter().fold(Dd::new(f64::NEG_INFINITY), |a, b| if b.hi > a.hi { *b } else { a });
        if logs.len() == 1 {
            return m;
        }
        let s = logs.iter().fold(Dd::ZERO, |acc, l| acc + (*l - m).exp());
        m + s.ln()
    }

    /// Double-double counterpart of `eval_scaled`: `out[n] = pₙ e^{-M}`, returns `M`.
    pub fn derivatives_scaled(&self, x: Dd, out: &mut [Dd]) -> Dd {
        let logs: Vec<Dd> = self
            .comps
            .iter()
            .map(|c| {
                let u = x - c.center;
                c.log_norm - u.sqr() * c.inv_two_v
            })
            .collect();
        let m = logs.iter().fold(Dd::new(f64::NEG_INFINITY), |a, b| if b.hi > a.hi { *b } else { a });
        out.iter_mut().for_each(|o| *o = Dd::ZERO);
        let mut he = vec![Dd::ZERO; out.len()];
        for (c, l) in self.comps.iter().zip(&logs) {
            let s = (*l - m).exp();
            if s.hi == 0.0 {
                continue;
            }
            let u = (x - c.center) * c.inv_sd;
            he[0] = Dd::ONE;
            if he.len() > 1 {
                he[1] = u;
            }
            for n in 1..he.len().saturating_sub(1) {
                he[n + 1] = u * he[n] - he[n - 1].mul_f64(n as f64);
            }
            let mut f = s;
            for (n, o) in out.iter_mut().enumerate() {
                *o = *o + f * he[n];
                f = -(f * c.inv_sd);
            }
        }
        m
    }
}

/// `∂ⁿp/∂xⁿ` at `(x, t)` from the Hermite form of each component.
pub fn density_derivative(d: &MixtureDensity, x: f64, t: f64, n: usize) -> f64 {
    let mut out = vec![0.0; n + 1];
    let m = d.eval_scaled(x, t, &mut out);
    out[n] * m.exp()
}
