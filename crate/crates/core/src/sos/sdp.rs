use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::problem::GramProblem;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Bound on each nullspace coordinate; keeps the barrier problem bounded.
    pub box_radius: f64,
    /// Feasibility tolerance on the margin.
    pub tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { box_radius: 1e4, tol: 1e-9, max_newton: 200, max_outer: 40 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasiblePoint {
    pub alpha: f64,
    #[serde(serialize_with = "ser_matrix")]
    pub gram: DMatrix<f64>,
    pub slacks: Vec<f64>,
    /// Smallest eigenvalue of `gram`.
    pub margin: f64,
    pub residual: f64,
    /// All variables in problem order.
    pub x: Vec<f64>,
}

fn ser_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<f64> = (0..m.ncols()).map(|j| m[(i, j)]).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Feasibility {
    Feasible(FeasiblePoint),
    Infeasible { best: FeasiblePoint, violation: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn point(&self) -> &FeasiblePoint {
        match self {
            Feasibility::Feasible(p) => p,
            Feasibility::Infeasible { best, .. } => best,
        }
    }

    pub fn into_result(self) -> Result<FeasiblePoint> {
        match self {
            Feasibility::Feasible(p) => Ok(p),
            Feasibility::Infeasible { best, violation } => Err(Error::Infeasible { alpha: best.alpha, violation }),
        }
    }
}

/// Maximize the smallest eigenvalue of the Gram matrix subject to the matching constraints.
pub fn solve_feasibility(p: &GramProblem, alpha: f64) -> Result<Feasibility> {
    solve_feasibility_with(p, alpha, &SolverOptions::default())
}

pub fn solve_feasibility_with(p: &GramProblem, alpha: f64, opts: &SolverOptions) -> Result<Feasibility> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let n = p.size();
    let ne = p.num_entries();
    let nv = p.num_vars();
    let (rows, rhs) = p.instantiate(alpha);
    let r = rows.len();

    // scaled equality system C x = d, padded square so the SVD yields a full V
    let dim = r.max(nv);
    let mut c = DMatrix::<f64>::zeros(dim, nv);
    let mut d = DVector::<f64>::zeros(dim);
    for (i, (row, b)) in rows.iter().zip(&rhs).enumerate() {
        let s = row.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(b.abs()).max(1e-300);
        for (j, v) in row.iter().enumerate() {
            c[(i, j)] = v / s;
        }
        d[i] = b / s;
    }
    let svd = c.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().expect("u"), svd.v_t.as_ref().expect("v_t"));
    let smax = svd.singular_values.max();
    let cut = smax.max(1.0) * 1e-11;
    let mut x0 = DVector::<f64>::zeros(nv);
    let mut null_cols = Vec::new();
    for k in 0..svd.singular_values.len().min(nv) {
        let sv = svd.singular_values[k];
        let vk = vt.row(k).transpose();
        if sv > cut {
            x0 += &vk * (u.column(k).dot(&d) / sv);
        } else {
            null_cols.push(vk);
        }
    }
    let consistency = (&c * &x0 - &d).amax();
    let basis = if null_cols.is_empty() { DMatrix::zeros(nv, 0) } else { DMatrix::from_columns(&null_cols) };

    let gram_of = |x: &DVector<f64>| {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for v in 0..ne {
            let (i, j) = p.var_entry(v).expect("entry");
            a[(i, j)] = x[v];
            a[(j, i)] = x[v];
        }
        a
    };
    let finish = |x: DVector<f64>| -> FeasiblePoint {
        let gram = gram_of(&x);
        let margin = gram.clone().symmetric_eigenvalues().min();
        let xs: Vec<f64> = x.iter().copied().collect();
        FeasiblePoint { alpha, gram, slacks: xs[ne..].to_vec(), margin, residual: p.residual(alpha, &xs), x: xs }
    };

    if consistency > 1e-8 {
        let best = finish(x0);
        return Ok(Feasibility::Infeasible { best, violation: consistency });
    }

    let q = basis.ncols();
    let a0 = gram_of(&x0);
    let dirs: Vec<DMatrix<f64>> = (0..q).map(|k| gram_of(&basis.column(k).into_owned())).collect();
    let slack_lin: Vec<(DVector<f64>, f64)> = (ne..nv).map(|v| (basis.row(v).transpose(), x0[v])).collect();

    // stage 1: slacks tied to the margin
    let stage1 = Barrier {
        a0: &a0,
        dirs: &dirs,
        lin: slack_lin.iter().map(|(a, b)| (a.clone(), *b, 1.0)).collect(),
        radius: opts.box_radius,
    };
    let y0 = DVector::<f64>::zeros(q);
    let t0 = stage1.upper_start(&y0) - 1.0;
    let (y1, t1) = stage1.maximize(y0, t0, opts)?;

    if t1 < -opts.tol {
        let best = finish(&x0 + &basis * &y1);
        return Ok(Feasibility::Infeasible { best, violation: -t1 });
    }

    let mut y = y1;
    if t1 > 1e3 * opts.tol && !slack_lin.is_empty() {
        // stage 2: slacks only need to stay positive
        let stage2 = Barrier {
            a0: &a0,
            dirs: &dirs,
            lin: slack_lin.iter().map(|(a, b)| (a.clone(), *b, 0.0)).collect(),
            radius: opts.box_radius,
        };
        let t0 = stage2.upper_start(&y) - 1.0;
        let (y2, _) = stage2.maximize(y.clone(), t0, opts)?;
        y = y2;
    }
    let mut x = &x0 + &basis * &y;
    polish(&c, &d, &mut x, ne);
    let pt = finish(x);
    if pt.residual > 1e-9 {
        return Err(Error::NumericalFailure {
            what: format!("constraint residual {:.3e} at alpha {alpha}", pt.residual),
        });
    }
    if pt.margin < -opts.tol {
        let v = -pt.margin;
        return Ok(Feasibility::Infeasible { best: pt, violation: v });
    }
    Ok(Feasibility::Feasible(pt))
}

/// Clamp tiny negative slacks to zero and project back onto the equality constraints.
fn polish(c: &DMatrix<f64>, d: &DVector<f64>, x: &mut DVector<f64>, ne: usize) {
    let nv = x.len();
    let mut fixed = vec![false; nv];
    for v in ne..nv {
        if x[v] < 0.0 {
            x[v] = 0.0;
            fixed[v] = true;
        }
    }
    let free: Vec<usize> = (0..nv).filter(|&v| !fixed[v]).collect();
    let cf = DMatrix::from_fn(c.nrows(), free.len(), |i, j| c[(i, free[j])]);
    let res = d - c * &*x;
    if let Ok(dx) = cf.svd(true, true).solve(&res, 1e-12) {
        for (j, &v) in free.iter().enumerate() {
            x[v] += dx[j];
        }
    }
}

/// Log-det barrier for: maximize t s.t. A0 + Σ yᵢAᵢ − tI ⪰ 0, aⱼ·y + bⱼ − τⱼt ≥ 0, |yᵢ| ≤ R.
struct Barrier<'a> {
    a0: &'a DMatrix<f64>,
    dirs: &'a [DMatrix<f64>],
    lin: Vec<(DVector<f64>, f64, f64)>,
    radius: f64,
}

impl Barrier<'_> {
    fn slack_matrix(&self, y: &DVector<f64>, t: f64) -> DMatrix<f64> {
        let mut s = self.a0.clone();
        for (k, a) in self.dirs.iter().enumerate() {
            if y[k] != 0.0 {
                s += a * y[k];
            }
        }
        for i in 0..s.nrows() {
            s[(i, i)] -= t;
        }
        s
    }

    /// Largest t for which (y, t) is strictly inside, before the box.
    fn upper_start(&self, y: &DVector<f64>) -> f64 {
        let mut t = self.slack_matrix(y, 0.0).symmetric_eigenvalues().min();
        for (a, b, tau) in &self.lin {
            let g = a.dot(y) + b;
            if *tau > 0.0 {
                t = t.min(g / tau);
            }
        }
        t
    }

    /// Barrier value, or None outside the domain.
    fn phi(&self, y: &DVector<f64>, t: f64) -> Option<f64> {
        let s = self.slack_matrix(y, t);
        let ch = s.cholesky()?;
        let mut v = -2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        for (a, b, tau) in &self.lin {
            let g = a.dot(y) + b - tau * t;
            if g <= 0.0 {
                return None;
            }
            v -= g.ln();
        }
        for yi in y.iter() {
            let (lo, hi) = (self.radius + yi, self.radius - yi);
            if lo <= 0.0 || hi <= 0.0 {
                return None;
            }
            v -= lo.ln() + hi.ln();
        }
        Some(v)
    }

    fn maximize(&self, mut y: DVector<f64>, mut t: f64, opts: &SolverOptions) -> Result<(DVector<f64>, f64)> {
        let q = y.len();
        let n = self.a0.nrows();
        let nu = (n + self.lin.len() + 2 * q) as f64;
        let mut s = 1.0;
        for _ in 0..opts.max_outer {
            let mut centered = false;
            for _ in 0..opts.max_newton {
                let phi0 = self.phi(&y, t).expect("iterate stays interior");
                let (grad, hess) = self.derivatives(&y, t, s);
                let step = match hess.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&grad)),
                    None => {
                        let ridge = hess.diagonal().amax().max(1.0) * 1e-12;
                        let h = hess + DMatrix::identity(q + 1, q + 1) * ridge;
                        match h.cholesky() {
                            Some(ch) => ch.solve(&(-&grad)),
                            None => return Err(Error::NumericalFailure { what: "singular Newton system".into() }),
                        }
                    }
                };
                let dec = -grad.dot(&step);
                if dec < 1e-10 {
                    centered = true;
                    break;
                }
                let mut h = 1.0;
                loop {
                    let yn = &y + step.rows(0, q) * h;
                    let tn = t + step[q] * h;
                    if let Some(ph) = self.phi(&yn, tn) {
                        // change in objective, kept separate from the large linear part
                        if -s * h * step[q] + (ph - phi0) <= -0.25 * h * dec {
                            y = yn;
                            t = tn;
                            break;
                        }
                    }
                    h *= 0.5;
                    if h < 1e-14 {
                        break;
                    }
                }
                if h < 1e-14 {
                    // no progress possible at this precision
                    centered = true;
                    break;
                }
            }
            if !centered && nu / s < 1e-6 {
                // precision limited near the boundary; the current iterate is as good as it gets
                return Ok((y, t));
            }
            if !centered {
                return Err(Error::NumericalFailure { what: "barrier centering did not converge".into() });
            }
            if nu / s < opts.tol * 1e-2 {
                return Ok((y, t));
            }
            s *= 8.0;
        }
        Ok((y, t))
    }

    fn derivatives(&self, y: &DVector<f64>, t: f64, s: f64) -> (DVector<f64>, DMatrix<f64>) {
        let q = y.len();
        let sm = self.slack_matrix(y, t);
        let inv = sm.cholesky().expect("interior").inverse();
        let w: Vec<DMatrix<f64>> = self.dirs.iter().map(|a| &inv * a).collect();
        let mut grad = DVector::<f64>::zeros(q + 1);
        let mut hess = DMatrix::<f64>::zeros(q + 1, q + 1);
        for i in 0..q {
            grad[i] = -w[i].trace();
            for k in 0..=i {
                let v = w[i].component_mul(&w[k].transpose()).sum();
                hess[(i, k)] = v;
                hess[(k, i)] = v;
            }
            let v = -w[i].component_mul(&inv.transpose()).sum();
            hess[(i, q)] = v;
            hess[(q, i)] = v;
        }
        grad[q] = -s + inv.trace();
        hess[(q, q)] = inv.component_mul(&inv).sum();
        for (a, b, tau) in &self.lin {
            let g = a.dot(y) + b - tau * t;
            let (g1, g2) = (1.0 / g, 1.0 / (g * g));
            for i in 0..q {
                grad[i] -= a[i] * g1;
                for k in 0..=i {
                    let v = a[i] * a[k] * g2;
                    hess[(i, k)] += v;
                    if k != i {
                        hess[(k, i)] += v;
                    }
                }
                hess[(i, q)] -= a[i] * tau * g2;
                hess[(q, i)] -= a[i] * tau * g2;
            }
            grad[q] += tau * g1;
            hess[(q, q)] += tau * tau * g2;
        }
        for i in 0..q {
            let (lo, hi) = (self.radius + y[i], self.radius - y[i]);
            grad[i] += -1.0 / lo + 1.0 / hi;
            hess[(i, i)] += 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
        (grad, hess)
    }
}
