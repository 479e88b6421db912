use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::problem::GramProblem;
use super::sdp::{solve_feasibility, FeasiblePoint};
use crate::algebra::{rat_from_f64_rounded, AlphaPoly, PolyJson};
use crate::error::{Error, Result};

/// Rounded polynomial curves for the free parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedParams {
    pub params: BTreeMap<String, AlphaPoly>,
    pub fit_degree: usize,
    pub round_denominator: u64,
}

impl FittedParams {
    pub fn get(&self, name: &str) -> Option<&AlphaPoly> {
        self.params.get(name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct J<'a> {
            params: BTreeMap<&'a str, PolyJson>,
            rendered: BTreeMap<&'a str, String>,
            fit_degree: usize,
            round_denominator: u64,
        }
        serde_json::to_value(J {
            params: self.params.iter().map(|(k, v)| (k.as_str(), PolyJson::from(v))).collect(),
            rendered: self.params.iter().map(|(k, v)| (k.as_str(), v.render())).collect(),
            fit_degree: self.fit_degree,
            round_denominator: self.round_denominator,
        })
        .expect("serializable")
    }
}

/// Least-squares polynomial of the given degree, coefficients rounded to `1/den`.
pub fn fit_samples(alphas: &[f64], values: &[f64], degree: usize, den: u64) -> Result<AlphaPoly> {
    if alphas.len() != values.len() {
        return Err(Error::invalid("sample abscissae and values differ in length"));
    }
    if alphas.len() < degree + 1 {
        return Err(Error::invalid(format!("{} samples cannot determine a degree {degree} fit", alphas.len())));
    }
    if den == 0 {
        return Err(Error::invalid("rounding denominator must be positive"));
    }
    let v = DMatrix::from_fn(alphas.len(), degree + 1, |i, j| alphas[i].powi(j as i32));
    let y = DVector::from_column_slice(values);
    let coef = v
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::NumericalFailure { what: format!("least squares: {e}") })?;
    Ok(AlphaPoly::new(coef.iter().map(|c| rat_from_f64_rounded(*c, den)).collect()))
}

/// Fits each named column of a sample table.
pub fn fit_table(names: &[String], alphas: &[f64], rows: &[Vec<f64>], degree: usize, den: u64) -> Result<FittedParams> {
    let mut params = BTreeMap::new();
    for (k, name) in names.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        params.insert(name.clone(), fit_samples(alphas, &col, degree, den)?);
    }
    Ok(FittedParams { params, fit_degree: degree, round_denominator: den })
}

/// Solve at every grid point (in parallel) and fit every free parameter.
pub fn sample_and_fit(
    p: &GramProblem,
    alpha_grid: &[f64],
    fit_degree: usize,
    round_denominator: u64,
) -> Result<(FittedParams, Vec<FeasiblePoint>)> {
    let param = p.parametrize(None)?;
    let mut grid = alpha_grid.to_vec();
    grid.sort_by(|a, b| a.total_cmp(b));
    let points: Vec<Result<FeasiblePoint>> =
        grid.par_iter().map(|&a| solve_feasibility(p, a).and_then(|f| f.into_result())).collect();
    let points: Vec<FeasiblePoint> = points.into_iter().collect::<Result<_>>()?;
    let names: Vec<String> = param.free.iter().map(|&v| p.var_name(v)).collect();
    let rows: Vec<Vec<f64>> = points.iter().map(|pt| param.free.iter().map(|&v| pt.x[v]).collect()).collect();
    let fitted = fit_table(&names, &grid, &rows, fit_degree, round_denominator)?;
    Ok((fitted, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn exact_samples_are_recovered() {
        let p = AlphaPoly::new(vec![rat(3, 10), rat(-7, 5), rat(1, 2)]);
        let xs = [0.5, 0.7, 1.0, 1.3, 1.9];
        let ys: Vec<f64> = xs.iter().map(|x| p.eval_f64(*x)).collect();
        assert_eq!(fit_samples(&xs, &ys, 2, 10).unwrap(), p);
        assert!(fit_samples(&xs[..2], &ys[..2], 2, 10).is_err());
    }
}
