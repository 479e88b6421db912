use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::dd::Dd;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Half-width of the integration domain in units of the largest component deviation.
    pub truncation_radius: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { truncation_radius: 12.0, abs_tol: 1e-15, rel_tol: 1e-12, max_subdivisions: 4000 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_radius >= 8.0) {
            return Err(Error::invalid("truncation radius must be at least 8"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// `∫|fᵢ|`, used as the scale for relative tolerances.
    pub l1: Vec<f64>,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: Vec<f64>,
    l1: Vec<f64>,
    score: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.score == o.score
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.score.total_cmp(&o.score)
    }
}

/// 15-point Kronrod rule with the QUADPACK error heuristic, for every component at once.
fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize) -> Segment {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let mut fc = vec![0.0; dim];
    f(c, &mut fc);
    let mut f1s = vec![vec![0.0; dim]; 7];
    let mut f2s = vec![vec![0.0; dim]; 7];
    for j in 0..7 {
        let x = hl * XGK[j];
        f(c - x, &mut f1s[j]);
        f(c + x, &mut f2s[j]);
    }
    let mut value = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut l1 = vec![0.0; dim];
    for i in 0..dim {
        let mut resk = fc[i] * WGK[7];
        let mut resg = fc[i] * WG[3];
        let mut resabs = fc[i].abs() * WGK[7];
        for j in 0..7 {
            let (f1, f2) = (f1s[j][i], f2s[j][i]);
            resk += WGK[j] * (f1 + f2);
            resabs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                resg += WG[j / 2] * (f1 + f2);
            }
        }
        let reskh = resk * 0.5;
        let mut resasc = WGK[7] * (fc[i] - reskh).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((f1s[j][i] - reskh).abs() + (f2s[j][i] - reskh).abs());
        }
        let (resabs, resasc) = (resabs * hl.abs(), resasc * hl.abs());
        let mut e = ((resk - resg) * hl).abs();
        if resasc != 0.0 && e != 0.0 {
            e = resasc * (200.0 * e / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }
        value[i] = resk * hl;
        err[i] = e;
        l1[i] = resabs;
    }
    Segment { a, b, value, err, l1, score: 0.0 }
}

/// Globally adaptive Gauss-Kronrod integration of a vector-valued integrand.
///
/// Component i converges when its error estimate is below
/// `max(abs_tol, rel_tol·∫|fᵢ|)`.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    f: F,
    dim: usize,
    a: f64,
    b: f64,
    pieces: usize,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    integrate_leading(f, dim, dim, a, b, pieces, cfg)
}

/// Like [`integrate_vec`], but only the first `active` components steer refinement;
/// the rest are carried along at whatever accuracy that yields.
pub(crate) fn integrate_leading<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    active: usize,
    a: f64,
    b: f64,
    pieces: usize,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let pieces = pieces.max(1);
    let mut heap = BinaryHeap::new();
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    let mut total_l1 = vec![0.0; dim];
    let mut evaluations = 0;
    let mut segs = Vec::with_capacity(pieces);
    for p in 0..pieces {
        let lo = a + (b - a) * p as f64 / pieces as f64;
        let hi = a + (b - a) * (p + 1) as f64 / pieces as f64;
        let s = gk15(&mut f, lo, hi, dim);
        evaluations += 15;
        for i in 0..dim {
            total[i] += s.value[i];
            total_err[i] += s.err[i];
            total_l1[i] += s.l1[i];
        }
        segs.push(s);
    }
    let tol = |l1: &[f64], i: usize| cfg.abs_tol.max(cfg.rel_tol * l1[i]);
    let score = |s: &Segment, l1: &[f64]| (0..active).map(|i| s.err[i] / tol(l1, i)).fold(0.0, f64::max);
    for mut s in segs {
        s.score = score(&s, &total_l1);
        heap.push(s);
    }
    let mut count = pieces;
    loop {
        if (0..active).all(|i| total_err[i] <= tol(&total_l1, i)) {
            break;
        }
        if count >= cfg.max_subdivisions {
            let worst = (0..active).map(|i| total_err[i] / tol(&total_l1, i)).fold(0.0, f64::max);
            return Err(Error::QuadratureNonConvergence {
                what: format!("{count} subintervals, error {worst:.2e} times tolerance"),
            });
        }
        let s = heap.pop().expect("nonempty");
        let m = 0.5 * (s.a + s.b);
        let left = gk15(&mut f, s.a, m, dim);
        let right = gk15(&mut f, m, s.b, dim);
        evaluations += 30;
        for i in 0..dim {
            total[i] += left.value[i] + right.value[i] - s.value[i];
            total_err[i] += left.err[i] + right.err[i] - s.err[i];
            total_l1[i] += left.l1[i] + right.l1[i] - s.l1[i];
        }
        for mut c in [left, right] {
            c.score = score(&c, &total_l1);
            heap.push(c);
        }
        count += 1;
    }
    Ok(QuadResult { values: total, errors: total_err, l1: total_l1, evaluations })
}

/// Scalar convenience wrapper.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let r = integrate_vec(|x, out| out[0] = f(x), 1, a, b, 8, cfg)?;
    Ok((r.values[0], r.errors[0]))
}

/// Trapezoid rule in double-double, halving the step until two levels agree to `rel`.
///
/// Converges geometrically for smooth integrands that decay at both ends.
pub(crate) fn trapezoid_dd<F: Fn(Dd) -> Dd>(f: F, a: f64, b: f64, n0: usize, rel: f64, max_levels: u32) -> Result<Dd> {
    let (a, b) = (Dd::new(a), Dd::new(b));
    let mut n = n0.max(2);
    let mut h = (b - a) / Dd::new(n as f64);
    let mut sum = (f(a) + f(b)).mul_f64(0.5);
    for i in 1..n {
        sum = sum + f(a + h.mul_f64(i as f64));
    }
    let mut t = sum * h;
    for _ in 0..max_levels {
        let half = h.mul_f64(0.5);
        let mut mids = Dd::ZERO;
        for i in 0..n {
            mids = mids + f(a + half + h.mul_f64(i as f64));
        }
        sum = sum + mids;
        n *= 2;
        h = half;
        let next = sum * h;
        let diff = (next - t).abs().to_f64();
        t = next;
        if diff <= rel * t.abs().to_f64() {
            return Ok(t);
        }
    }
    Err(Error::QuadratureNonConvergence { what: format!("trapezoid rule did not settle with {n} points") })
}

/// Vector trapezoid rule in double-double. Component i settles when two levels agree to
/// `rel · scale[i]`, where `scale` is read from the current estimate via `scale_of`.
/// Returns the values and the last level differences.
pub(crate) fn trapezoid_dd_vec<F, S>(
    f: F,
    dim: usize,
    active: usize,
    a: f64,
    b: f64,
    n0: usize,
    rel: f64,
    max_levels: u32,
    scale_of: S,
) -> Result<(Vec<Dd>, Vec<f64>)>
where
    F: Fn(Dd, &mut [Dd]),
    S: Fn(&[Dd], usize) -> f64,
{
    let (a, b) = (Dd::new(a), Dd::new(b));
    let mut n = n0.max(2);
    let mut h = (b - a) / Dd::new(n as f64);
    let mut buf = vec![Dd::ZERO; dim];
    let mut sum = vec![Dd::ZERO; dim];
    let add = |x: Dd, w: f64, sum: &mut [Dd], buf: &mut [Dd]| {
        f(x, buf);
        for i in 0..dim {
            sum[i] = sum[i] + buf[i].mul_f64(w);
        }
    };
    add(a, 0.5, &mut sum, &mut buf);
    add(b, 0.5, &mut sum, &mut buf);
    for i in 1..n {
        add(a + h.mul_f64(i as f64), 1.0, &mut sum, &mut buf);
    }
    let mut t: Vec<Dd> = sum.iter().map(|s| *s * h).collect();
    for _ in 0..max_levels {
        let half = h.mul_f64(0.5);
        for i in 0..n {
            add(a + half + h.mul_f64(i as f64), 1.0, &mut sum, &mut buf);
        }
        n *= 2;
        h = half;
        let next: Vec<Dd> = sum.iter().map(|s| *s * h).collect();
        let diffs: Vec<f64> = (0..dim).map(|i| (next[i] - t[i]).abs().to_f64()).collect();
        t = next;
        if (0..active).all(|i| diffs[i] <= rel * scale_of(&t, i)) {
            return Ok((t, diffs));
        }
    }
    Err(Error::QuadratureNonConvergence { what: format!("trapezoid rule did not settle with {n} points") })
}
