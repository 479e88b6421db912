use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derivative::{engine_derivatives, spectral_derivatives, Route, MAX_SPECTRAL_ORDER, SPECTRAL_DEGREE};
use super::mixture::MixtureDensity;
use super::moments::EvalPoint;
use super::quadrature::QuadratureConfig;
use crate::calculus::EntropyKind;
use crate::error::{Error, Result};

/// One evaluated `(k, α, t)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub t: f64,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub route: Option<Route>,
    /// Sign of the value when it exceeds the threshold times its error, else 0.
    pub sign: i8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// A value from the route not used for the cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub route: Route,
    pub value: f64,
    pub error: f64,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// The sign contradicts the expected one at both ends; each end is within
    /// `bracket_width` of a point where it no longer does (or is a grid end).
    pub t_lo: f64,
    pub t_hi: f64,
    pub witness: ScanCell,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignSeries {
    pub order: u32,
    pub alpha: f64,
    pub expected_sign: i8,
    pub t_grid: Vec<f64>,
    pub cells: Vec<ScanCell>,
    /// Extra points visited while refining local minima, sorted by t.
    pub refined: Vec<ScanCell>,
    pub violations: Vec<Violation>,
    /// Flagged runs whose witness the other route decisively contradicts.
    pub disputed: Vec<Violation>,
}

impl SignSeries {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.failure.is_some()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignScanReport {
    pub kind: EntropyKind,
    pub series: Vec<SignSeries>,
}

impl SignScanReport {
    pub fn get(&self, order: u32, alpha: f64) -> Option<&SignSeries> {
        self.series.iter().find(|s| s.order == order && (s.alpha - alpha).abs() < 1e-12)
    }

    pub fn violation_count(&self) -> usize {
        self.series.iter().map(|s| s.violations.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

pub type ProgressFn = Arc<dyn Fn(&str) + Send + Sync>;

#[derive(Clone)]
pub struct ScanOptions {
    pub quadrature: QuadratureConfig,
    /// A sign counts only when `|value| > threshold · error`.
    pub threshold: f64,
    pub bracket_width: f64,
    pub refine_minima: bool,
    pub cross_check: bool,
    pub progress: Option<ProgressFn>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            quadrature: QuadratureConfig::default(),
            threshold: 10.0,
            bracket_width: 1e-3,
            refine_minima: true,
            cross_check: true,
            progress: None,
        }
    }
}

impl std::fmt::Debug for ScanOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScanOptions")
            .field("quadrature", &self.quadrature)
            .field("threshold", &self.threshold)
            .field("bracket_width", &self.bracket_width)
            .field("refine_minima", &self.refine_minima)
            .field("cross_check", &self.cross_check)
            .finish()
    }
}

/// `points` values of t from `t_min` to `t_max`, geometric when `log` is set.
pub fn t_grid(t_min: f64, t_max: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
        return Err(Error::invalid("t grid needs 0 < t_min < t_max"));
    }
    if points < 2 {
        return Err(Error::invalid("t grid needs at least 2 points"));
    }
    Ok((0..points)
        .map(|i| {
            let f = i as f64 / (points - 1) as f64;
            if log {
                t_min * (t_max / t_min).powf(f)
            } else {
                t_min + (t_max - t_min) * f
            }
        })
        .collect())
}

fn expected_sign(k: u32) -> i8 {
    if k % 2 == 1 {
        1
    } else {
        -1
    }
}

struct Evaluator<'a> {
    d: &'a MixtureDensity,
    kind: EntropyKind,
    alpha: f64,
    opts: &'a ScanOptions,
}

impl Evaluator<'_> {
    fn decisive(&self, v: f64, e: f64) -> bool {
        v.abs() > self.opts.threshold * e
    }

    fn sign_of(&self, v: f64, e: f64) -> i8 {
        if !self.decisive(v, e) {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Engine first; the spectral route replaces it when the engine fails or is not
    /// decisive and has a larger error.
    fn cells(&self, orders: &[u32], t: f64) -> Vec<ScanCell> {
        let fail = |msg: String| ScanCell { t, value: None, error: None, route: None, sign: 0, failure: Some(msg) };
        let at = match EvalPoint::new(self.alpha, t) {
            Ok(a) => a,
            Err(e) => return orders.iter().map(|_| fail(e.to_string())).collect(),
        };
        let engine = engine_derivatives(self.d, self.kind, orders, &at, &self.opts.quadrature);
        let weak: Vec<u32> = orders
            .iter()
            .enumerate()
            .filter(|(i, &k)| {
                k <= MAX_SPECTRAL_ORDER
                    && match &engine {
                        Ok(v) => !self.decisive(v[*i].value, v[*i].error),
                        Err(_) => true,
                    }
            })
            .map(|(_, &k)| k)
            .collect();
        let spectral = match weak.iter().max() {
            Some(&m) => Some(spectral_derivatives(self.d, self.kind, m, &at, SPECTRAL_DEGREE)),
            None => None,
        };
        orders
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                let e = engine.as_ref().ok().map(|v| v[i]);
                let s = match (&spectral, weak.contains(&k)) {
                    (Some(Ok(v)), true) => Some(v[k as usize - 1]),
                    _ => None,
                };
                let pick = match (e, s) {
                    (Some(e), Some(s)) if s.error < e.error => Some((s, Route::Spectral)),
                    (Some(e), _) => Some((e, Route::Engine)),
                    (None, Some(s)) => Some((s, Route::Spectral)),
                    (None, None) => None,
                };
                match pick {
                    Some((v, route)) => ScanCell {
                        t,
                        value: Some(v.value),
                        error: Some(v.error),
                        route: Some(route),
                        sign: self.sign_of(v.value, v.error),
                        failure: None,
                    },
                    None => {
                        let mut msg = match &engine {
                            Err(e) => e.to_string(),
                            Ok(_) => String::new(),
                        };
                        if let Some(Err(e)) = &spectral {
                            msg = format!("{msg}; {e}");
                        }
                        fail(msg)
                    }
                }
            })
            .collect()
    }

    fn cell(&self, k: u32, t: f64) -> ScanCell {
        self.cells(&[k], t).pop().expect("one order")
    }

    fn cross_check(&self, k: u32, c: &ScanCell) -> Option<CrossCheck> {
        let at = EvalPoint::new(self.alpha, c.t).ok()?;
        let (route, v) = match c.route? {
            Route::Engine if k <= MAX_SPECTRAL_ORDER => {
                let v = spectral_derivatives(self.d, self.kind, k, &at, SPECTRAL_DEGREE).ok()?;
                (Route::Spectral, v[k as usize - 1])
            }
            Route::Spectral => {
                let v = engine_derivatives(self.d, self.kind, &[k], &at, &self.opts.quadrature).ok()?;
                (Route::Engine, v[0])
            }
            _ => return None,
        };
        Some(CrossCheck { route, value: v.value, error: v.error, sign: self.sign_of(v.value, v.error) })
    }
}

fn signed(c: &ScanCell, expected: i8) -> Option<f64> {
    c.value.map(|v| v * expected as f64)
}

fn violates(c: &ScanCell, expected: i8) -> bool {
    c.sign != 0 && c.sign != expected
}

/// Golden-section search for the minimum of the signed value on `[a, b]`, stopping
/// early at the first violating probe.
fn refine_minimum(ev: &Evaluator, k: u32, expected: i8, a: f64, b: f64, width: f64) -> Vec<ScanCell> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut out = Vec::new();
    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut c1 = ev.cell(k, x1);
    let mut c2 = ev.cell(k, x2);
    out.push(c1.clone());
    out.push(c2.clone());
    for _ in 0..60 {
        if violates(&c1, expected) || violates(&c2, expected) || b - a < width {
            break;
        }
        let (Some(s1), Some(s2)) = (signed(&c1, expected), signed(&c2, expected)) else { break };
        if s1 < s2 {
            b = x2;
            x2 = x1;
            c2 = c1;
            x1 = b - INV_PHI * (b - a);
            c1 = ev.cell(k, x1);
            out.push(c1.clone());
        } else {
            a = x1;
            x1 = x2;
            c1 = c2;
            x2 = a + INV_PHI * (b - a);
            c2 = ev.cell(k, x2);
            out.push(c2.clone());
        }
    }
    out
}

/// Bisects between a violating `bad` point and a non-violating `good` point; returns the
/// violating end once the two are within `width`.
fn bisect_edge(ev: &Evaluator, k: u32, expected: i8, bad: f64, good: f64, width: f64) -> f64 {
    let (mut bad, mut good) = (bad, good);
    while (good - bad).abs() > width {
        let mid = 0.5 * (bad + good);
        if violates(&ev.cell(k, mid), expected) {
            bad = mid;
        } else {
            good = mid;
        }
    }
    bad
}

fn series_for(ev: &Evaluator, k: u32, t_grid: &[f64], cells: Vec<ScanCell>, opts: &ScanOptions) -> SignSeries {
    let expected = expected_sign(k);
    let mut refined = Vec::new();
    if opts.refine_minima {
        for i in 1..cells.len().saturating_sub(1) {
            let (l, m, r) = (&cells[i - 1], &cells[i], &cells[i + 1]);
            if violates(m, expected) {
                continue;
            }
            if let (Some(sl), Some(sm), Some(sr)) = (signed(l, expected), signed(m, expected), signed(r, expected)) {
                if sm <= sl && sm <= sr {
                    refined.extend(refine_minimum(ev, k, expected, l.t, r.t, opts.bracket_width));
                }
            }
        }
    }
    refined.sort_by(|a, b| a.t.total_cmp(&b.t));
    let mut points: Vec<&ScanCell> = cells.iter().chain(refined.iter()).collect();
    points.sort_by(|a, b| a.t.total_cmp(&b.t));

    let mut violations = Vec::new();
    let mut disputed = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if !violates(points[i], expected) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < points.len() && violates(points[i + 1], expected) {
            i += 1;
        }
        let end = i;
        let t_lo = if start > 0 {
            bisect_edge(ev, k, expected, points[start].t, points[start - 1].t, opts.bracket_width)
        } else {
            points[start].t
        };
        let t_hi = if end + 1 < points.len() {
            bisect_edge(ev, k, expected, points[end].t, points[end + 1].t, opts.bracket_width)
        } else {
            points[end].t
        };
        let witness = points[start..=end]
            .iter()
            .max_by(|a, b| {
                let ra = -signed(a, expected).unwrap_or(0.0) / a.error.unwrap_or(1.0).max(f64::MIN_POSITIVE);
                let rb = -signed(b, expected).unwrap_or(0.0) / b.error.unwrap_or(1.0).max(f64::MIN_POSITIVE);
                ra.total_cmp(&rb)
            })
            .map(|c| (*c).clone())
            .expect("nonempty run");
        let cross_check = if opts.cross_check { ev.cross_check(k, &witness) } else { None };
        let contradicted = cross_check.as_ref().is_some_and(|c| c.sign == expected);
        let v = Violation { t_lo, t_hi, witness, cross_check };
        if contradicted {
            disputed.push(v);
        } else {
            violations.push(v);
        }
        i += 1;
    }
    SignSeries {
        order: k,
        alpha: ev.alpha,
        expected_sign: expected,
        t_grid: t_grid.to_vec(),
        cells,
        refined,
        violations,
        disputed,
    }
}

/// Scans the sign of `∂ᵏh/∂tᵏ` against `(−1)^{k−1}` over `orders × alphas × t_grid`.
pub fn scan_signs(
    d: &MixtureDensity,
    kind: EntropyKind,
    orders: &[u32],
    alphas: &[f64],
    t_grid: &[f64],
) -> Result<SignScanReport> {
    scan_signs_with(d, kind, orders, alphas, t_grid, &ScanOptions::default())
}

pub fn scan_signs_with(
    d: &MixtureDensity,
    kind: EntropyKind,
    orders: &[u32],
    alphas: &[f64],
    t_grid: &[f64],
    opts: &ScanOptions,
) -> Result<SignScanReport> {
    d.validate()?;
    opts.quadrature.validate()?;
    if orders.is_empty() || orders.contains(&0) {
        return Err(Error::invalid("orders must be a nonempty set of positive integers"));
    }
    if t_grid.is_empty() || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("t grid must be positive and strictly increasing"));
    }
    let mut orders = orders.to_vec();
    orders.sort_unstable();
    orders.dedup();
    let alphas: Vec<f64> = if kind == EntropyKind::Shannon { vec![1.0] } else { alphas.to_vec() };
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::invalid("alphas must be a nonempty set of positive reals"));
    }

    let tasks: Vec<(usize, usize)> = (0..alphas.len()).flat_map(|a| (0..t_grid.len()).map(move |j| (a, j))).collect();
    let grid_cells: Vec<Vec<ScanCell>> = tasks
        .par_iter()
        .map(|&(a, j)| {
            let ev = Evaluator { d, kind, alpha: alphas[a], opts };
            ev.cells(&orders, t_grid[j])
        })
        .collect();
    if let Some(p) = &opts.progress {
        p(&format!("grid done: {} cells", tasks.len() * orders.len()));
    }

    let series_tasks: Vec<(usize, usize)> =
        (0..alphas.len()).flat_map(|a| (0..orders.len()).map(move |o| (a, o))).collect();
    let series: Vec<SignSeries> = series_tasks
        .par_iter()
        .map(|&(a, o)| {
            let ev = Evaluator { d, kind, alpha: alphas[a], opts };
            let cells: Vec<ScanCell> = (0..t_grid.len()).map(|j| grid_cells[a * t_grid.len() + j][o].clone()).collect();
            let s = series_for(&ev, orders[o], t_grid, cells, opts);
            if let Some(p) = &opts.progress {
                p(&format!(
                    "k={} alpha={} violations={} disputed={}",
                    s.order,
                    s.alpha,
                    s.violations.len(),
                    s.disputed.len()
                ));
            }
            s
        })
        .collect();
    Ok(SignScanReport { kind, series })
}
