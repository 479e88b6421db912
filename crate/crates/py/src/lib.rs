//! Python module `entropyflow`.
//!
//! Structured results (scan reports, certificates, identity outcomes) come back as plain
//! dicts and lists decoded from the JSON forms used by the command line.

use std::collections::BTreeMap;

use ef::algebra::{parse_rational, rational_to_string, MomentExpr as CoreExpr, RawIntegral};
use ef::calculus::{entropy_derivative_with_cap, identities, reduce_raw_integral, DEFAULT_MAX_ORDER};
use ef::numeric::{
    self, entropy_bounds, scan_signs_with, t_grid, tsallis2_identity_check, EvalPoint, MixtureDensity as CoreDensity,
    QuadratureConfig, Route, ScanOptions,
};
use ef::sos::{build_gram_problem, default_gram_basis, default_slacks, sample_and_fit};
use ef::verify::{assemble_matrix, certify_interval};
use ef::{catalog, EntropyKind};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;

fn err(e: ef::Error) -> PyErr {
    let payload = serde_json::to_string(&e).unwrap_or_default();
    match e {
        ef::Error::InvalidInput { .. }
        | ef::Error::Parse { .. }
        | ef::Error::NonCanonical { .. }
        | ef::Error::HomogeneityViolation { .. } => PyValueError::new_err((e.to_string(), payload)),
        _ => PyRuntimeError::new_err((e.to_string(), payload)),
    }
}

fn kind(s: &str) -> PyResult<EntropyKind> {
    s.parse().map_err(err)
}

fn from_json<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn to_value(obj: &Bound<'_, PyAny>) -> PyResult<serde_json::Value> {
    let s: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&s).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Linear combination of moment products with coefficients polynomial in α.
#[pyclass(module = "entropyflow", frozen)]
#[derive(Clone)]
struct MomentExpr {
    inner: CoreExpr,
}

#[pymethods]
impl MomentExpr {
    fn render(&self) -> String {
        self.inner.render()
    }

    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        from_json(py, &self.inner.to_json())
    }

    #[staticmethod]
    fn from_json(obj: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(MomentExpr { inner: CoreExpr::from_json(&to_value(obj)?).map_err(err)? })
    }

    /// Substitute a rational α given as text ("3/2") and return the coefficients per term.
    fn at_alpha(&self, alpha: &str) -> PyResult<MomentExpr> {
        let a = parse_rational(alpha).map_err(err)?;
        Ok(MomentExpr { inner: self.inner.substitute_alpha(&a) })
    }

    fn __len__(&self) -> usize {
        self.inner.terms().len()
    }

    fn __eq__(&self, other: &MomentExpr) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("MomentExpr({})", self.inner.render())
    }
}

#[pyclass(module = "entropyflow", frozen, get_all)]
struct DerivativeResult {
    kind: String,
    order: u32,
    expr: MomentExpr,
    normalizer_power: u32,
}

#[pymethods]
impl DerivativeResult {
    fn __repr__(&self) -> String {
        format!("DerivativeResult(kind={}, order={}, terms={})", self.kind, self.order, self.expr.inner.terms().len())
    }
}

/// Gaussian mixture evolving under the heat flow.
#[pyclass(module = "entropyflow", frozen)]
#[derive(Clone)]
struct MixtureDensity {
    inner: CoreDensity,
}

#[pymethods]
impl MixtureDensity {
    #[new]
    fn new(weights: Vec<f64>, centers: Vec<f64>, initial_variances: Vec<f64>) -> PyResult<Self> {
        Ok(MixtureDensity { inner: CoreDensity::new(weights, centers, initial_variances).map_err(err)? })
    }

    #[staticmethod]
    fn gaussian(center: f64, variance: f64) -> Self {
        MixtureDensity { inner: CoreDensity::gaussian(center, variance) }
    }

    #[staticmethod]
    fn two_point() -> Self {
        MixtureDensity { inner: CoreDensity::two_point() }
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(MixtureDensity { inner: CoreDensity::from_json(s).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    #[pyo3(signature = (x, t, n=0))]
    fn density(&self, x: f64, t: f64, n: usize) -> f64 {
        numeric::density_derivative(&self.inner, x, t, n)
    }

    #[pyo3(signature = (alpha, t, kind="renyi"))]
    fn entropy(&self, alpha: f64, t: f64, kind: &str) -> PyResult<f64> {
        entropy_eval(self, kind, alpha, t)
    }

    fn __repr__(&self) -> String {
        format!("MixtureDensity({})", self.inner.to_json())
    }
}

#[pyfunction]
#[pyo3(signature = (kind, order, max_order=DEFAULT_MAX_ORDER))]
fn derive(kind: &str, order: u32, max_order: u32) -> PyResult<DerivativeResult> {
    let r = entropy_derivative_with_cap(self::kind(kind)?, order, max_order).map_err(err)?;
    Ok(DerivativeResult {
        kind: r.kind.as_str().to_string(),
        order: r.order,
        expr: MomentExpr { inner: r.expr },
        normalizer_power: r.normalizer_power,
    })
}

/// Reduce `∫ p^{α+offset} ∏ pₙ^{kₙ}` to canonical moments; `factors` maps n to kₙ.
#[pyfunction]
fn reduce(offset: i64, factors: BTreeMap<u32, u32>) -> PyResult<MomentExpr> {
    let raw = RawIntegral::new(offset, factors).map_err(err)?;
    Ok(MomentExpr { inner: reduce_raw_integral(&raw) })
}

#[pyfunction]
fn verify_identities(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let outcomes = py.allow_threads(identities::verify_all);
    from_json(py, &serde_json::to_value(&outcomes).map_err(|e| PyRuntimeError::new_err(e.to_string()))?)
}

#[pyfunction]
#[pyo3(signature = (density, kind, alpha, t))]
fn entropy_eval(density: &MixtureDensity, kind: &str, alpha: f64, t: f64) -> PyResult<f64> {
    let at = EvalPoint::new(alpha, t).map_err(err)?;
    numeric::entropy_eval(&density.inner, self::kind(kind)?, &at, &QuadratureConfig::default()).map_err(err)
}

/// `(value, error)` of the k-th time derivative of the entropy.
#[pyfunction]
#[pyo3(signature = (density, kind, order, alpha, t, route="engine"))]
fn derivative_eval(
    py: Python<'_>,
    density: &MixtureDensity,
    kind: &str,
    order: u32,
    alpha: f64,
    t: f64,
    route: &str,
) -> PyResult<(f64, f64)> {
    let at = EvalPoint::new(alpha, t).map_err(err)?;
    let route: Route = route.parse().map_err(err)?;
    let k = self::kind(kind)?;
    let d = &density.inner;
    let v = py
        .allow_threads(|| numeric::derivative_with_error(d, k, order, &at, &QuadratureConfig::default(), route))
        .map_err(err)?;
    Ok((v.value, v.error))
}

#[pyfunction]
#[pyo3(signature = (density, orders, alphas, t_min=0.05, t_max=50.0, t_points=60, log_grid=false, kind="renyi", threshold=10.0, cross_check=true))]
#[allow(clippy::too_many_arguments)]
fn scan<'py>(
    py: Python<'py>,
    density: &MixtureDensity,
    orders: Vec<u32>,
    alphas: Vec<f64>,
    t_min: f64,
    t_max: f64,
    t_points: usize,
    log_grid: bool,
    kind: &str,
    threshold: f64,
    cross_check: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = t_grid(t_min, t_max, t_points, log_grid).map_err(err)?;
    let k = self::kind(kind)?;
    let opts = ScanOptions { threshold, cross_check, ..ScanOptions::default() };
    let d = &density.inner;
    let report = py.allow_threads(|| scan_signs_with(d, k, &orders, &alphas, &grid, &opts)).map_err(err)?;
    py.import("json")?.call_method1("loads", (report.to_json(),))
}

/// `(lower, upper)` bounds on the Rényi entropy at time t for initial variance σ².
#[pyfunction]
fn bounds(alpha: f64, t: f64, sigma2: f64) -> PyResult<(f64, Option<f64>)> {
    let b = entropy_bounds(alpha, t, sigma2).map_err(err)?;
    Ok((b.lower, b.upper))
}

/// `(lhs, rhs)` of the order-k Tsallis-2 moment identity.
#[pyfunction]
#[pyo3(signature = (density, order, t=1.0))]
fn tsallis2_check(density: &MixtureDensity, order: u32, t: f64) -> PyResult<(f64, f64)> {
    tsallis2_identity_check(&density.inner, order, t, &QuadratureConfig::default()).map_err(err)
}

/// Build the Gram problem, fit or load parameters, and certify positivity on an interval.
#[pyfunction]
#[pyo3(signature = (kind, order, alpha_grid=None, printed=None, fit_degree=4, round_denominator=catalog::DEFAULT_ROUND_DENOMINATOR, interval=None))]
fn certify<'py>(
    py: Python<'py>,
    kind: &str,
    order: u32,
    alpha_grid: Option<Vec<f64>>,
    printed: Option<&str>,
    fit_degree: usize,
    round_denominator: u64,
    interval: Option<(String, String)>,
) -> PyResult<Bound<'py, PyAny>> {
    let k = self::kind(kind)?;
    let out = py
        .allow_threads(|| -> ef::Result<serde_json::Value> {
            let target = entropy_derivative_with_cap(k, order, order)?;
            let basis = default_gram_basis(order, k)?;
            let problem = build_gram_problem(&target, &basis, &default_slacks(order, k))?;
            let (fitted, iv) = match (printed, &alpha_grid) {
                (Some(name), _) => {
                    let case = catalog::printed_case(name)
                        .ok_or_else(|| ef::Error::invalid(format!("no stored curves {name:?}")))?;
                    if case.kind != k || case.order != order {
                        return Err(ef::Error::invalid(format!(
                            "{name} belongs to {} order {}",
                            case.kind, case.order
                        )));
                    }
                    (case.params, Some(case.interval))
                }
                (None, Some(grid)) => (sample_and_fit(&problem, grid, fit_degree, round_denominator)?.0, None),
                (None, None) => return Err(ef::Error::invalid("pass alpha_grid or printed")),
            };
            let iv = match &interval {
                Some((lo, hi)) => (parse_rational(lo)?, parse_rational(hi)?),
                None => iv.ok_or_else(|| ef::Error::invalid("pass interval"))?,
            };
            let (matrix, slacks) = assemble_matrix(&fitted, &problem)?;
            let cert = certify_interval(&matrix, &slacks, (&iv.0, &iv.1));
            Ok(serde_json::json!({
                "interval": [rational_to_string(&iv.0), rational_to_string(&iv.1)],
                "fitted": fitted.to_json(),
                "certificate": cert.to_json(),
            }))
        })
        .map_err(err)?;
    from_json(py, &out)
}

#[pymodule]
fn entropyflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MomentExpr>()?;
    m.add_class::<DerivativeResult>()?;
    m.add_class::<MixtureDensity>()?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(verify_identities, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_eval, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_eval, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(tsallis2_check, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    Ok(())
}
