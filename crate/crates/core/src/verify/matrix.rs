use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::algebra::{lcm_of_denominators, rational_to_string, AlphaPoly, PolyJson, Rational};
use crate::catalog::resolve_alias;
use crate::error::{Error, Result};
use crate::sos::{FittedParams, GramProblem};

/// Symmetric matrix of polynomials in α.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    n: usize,
    entries: Vec<AlphaPoly>,
}

impl PolyMatrix {
    pub fn new(rows: Vec<Vec<AlphaPoly>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square and nonempty"));
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(format!("matrix not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(PolyMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(d: Vec<AlphaPoly>) -> Result<Self> {
        let n = d.len();
        let mut rows = vec![vec![AlphaPoly::zero(); n]; n];
        for (i, p) in d.into_iter().enumerate() {
            rows[i][i] = p;
        }
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &AlphaPoly {
        &self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<AlphaPoly>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn eval(&self, alpha: &Rational) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.n).map(|r| r.iter().map(|p| p.eval(alpha)).collect()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<PolyJson>> =
            self.entries.chunks(self.n).map(|r| r.iter().map(PolyJson::from).collect()).collect();
        serde_json::to_value(rows).expect("serializable")
    }
}

/// Substitute fitted free parameters and solve the matching constraints for the rest.
///
/// Returns the Gram matrix and the slack polynomials.
pub fn assemble_matrix(params: &FittedParams, template: &GramProblem) -> Result<(PolyMatrix, Vec<AlphaPoly>)> {
    let mut given: BTreeMap<usize, AlphaPoly> = BTreeMap::new();
    for (name, p) in &params.params {
        let v =
            template.var_index(resolve_alias(name)).ok_or_else(|| Error::UnresolvedParameter { name: name.clone() })?;
        given.insert(v, p.clone());
    }
    let names: Vec<String> = given.keys().map(|&v| template.var_name(v)).collect();
    let par = template.parametrize(Some(&names))?;
    if let Some(&v) = par.free.iter().find(|v| !given.contains_key(v)) {
        return Err(Error::UnresolvedParameter { name: template.var_name(v) });
    }
    for r in &par.residuals {
        let val = r.evaluate(&given).expect("free values present");
        if !val.is_zero() {
            return Err(Error::ResidualMismatch { what: format!("leftover constraint evaluates to {}", val.render()) });
        }
    }
    let values: Vec<AlphaPoly> = par.forms.iter().map(|f| f.evaluate(&given).expect("free values present")).collect();
    // substitute back: every matching constraint must hold identically
    for c in &template.constraints {
        let mut lhs = AlphaPoly::zero();
        for (v, coef) in c.coeffs.iter().enumerate() {
            if !coef.is_zero() {
                lhs = &lhs + &(coef * &values[v]);
            }
        }
        if lhs != c.rhs {
            return Err(Error::ResidualMismatch {
                what: format!("constraint for {} is not an identity", render_monomial(c)),
            });
        }
    }
    let n = template.size();
    let mut rows = vec![vec![AlphaPoly::zero(); n]; n];
    for v in 0..template.num_entries() {
        let (i, j) = template.var_entry(v).expect("entry");
        rows[i][j] = values[v].clone();
        rows[j][i] = values[v].clone();
    }
    let slacks = values[template.num_entries()..].to_vec();
    Ok((PolyMatrix::new(rows)?, slacks))
}

fn render_monomial(c: &crate::sos::Constraint) -> String {
    let s: Vec<String> = c.monomial.symbols().iter().map(|m| m.render()).collect();
    if s.is_empty() {
        "the constant term".into()
    } else {
        s.join(" ")
    }
}

/// Leading principal minors of orders 1..n by fraction-free elimination.
pub fn principal_minors(m: &PolyMatrix) -> Vec<AlphaPoly> {
    let n = m.size();
    let (mut a, d) = to_integer_rows(&m.rows());
    let mut out = Vec::with_capacity(n);
    let mut prev: IntPoly = vec![BigInt::one()];
    for k in 0..n {
        let pivot = a[k][k].clone();
        out.push(pivot.clone());
        if k + 1 == n {
            break;
        }
        if pivot.is_empty() {
            // elimination cannot continue; finish the remaining minors one by one
            let (rows, _) = to_integer_rows(&m.rows());
            for order in k + 2..=n {
                let sub: Vec<Vec<IntPoly>> = rows[..order].iter().map(|r| r[..order].to_vec()).collect();
                out.push(int_determinant(sub));
            }
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = ip_sub(&ip_mul(&a[i][j], &pivot), &ip_mul(&a[i][k], &a[k][j]));
                a[i][j] = ip_div_exact(&num, &prev);
            }
        }
        prev = pivot;
    }
    out.iter().enumerate().map(|(k, p)| from_int_poly(p, &d, k as u32 + 1)).collect()
}

/// Determinant by fraction-free elimination with row pivoting.
pub fn determinant(a: Vec<Vec<AlphaPoly>>) -> AlphaPoly {
    let n = a.len() as u32;
    let (rows, d) = to_integer_rows(&a);
    from_int_poly(&int_determinant(rows), &d, n)
}

/// Integer coefficients, lowest degree first, no trailing zeros.
type IntPoly = Vec<BigInt>;

fn trim(mut p: IntPoly) -> IntPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn ip_mul(a: &IntPoly, b: &IntPoly) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn ip_sub(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut out = a.clone();
    out.resize(a.len().max(b.len()), BigInt::zero());
    for (o, y) in out.iter_mut().zip(b) {
        *o -= y;
    }
    trim(out)
}

fn ip_div_exact(a: &IntPoly, b: &IntPoly) -> IntPoly {
    if a.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    let lead = &b[db];
    let mut rem = a.clone();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let top = &rem[i + db];
        if top.is_zero() {
            continue;
        }
        let (c, r) = top.div_rem(lead);
        assert!(r.is_zero(), "Bareiss division is exact");
        for (j, y) in b.iter().enumerate() {
            rem[i + j] -= &c * y;
        }
        q[i] = c;
    }
    assert!(rem.iter().all(Zero::is_zero), "Bareiss division is exact");
    trim(q)
}

/// Scale every entry by the common denominator `d`.
fn to_integer_rows(a: &[Vec<AlphaPoly>]) -> (Vec<Vec<IntPoly>>, BigInt) {
    let d = lcm_of_denominators(a.iter().flatten().flat_map(|p| p.coeffs().iter()));
    let dr = Rational::from_integer(d.clone());
    let rows = a
        .iter()
        .map(|r| r.iter().map(|p| p.coeffs().iter().map(|c| (c * &dr).to_integer()).collect()).collect())
        .collect();
    (rows, d)
}

/// Undo the scaling of an order-`k` minor.
fn from_int_poly(p: &IntPoly, d: &BigInt, k: u32) -> AlphaPoly {
    let dk = num_traits::pow(d.clone(), k as usize);
    AlphaPoly::new(p.iter().map(|c| Rational::new(c.clone(), dk.clone())).collect())
}

fn int_determinant(mut a: Vec<Vec<IntPoly>>) -> IntPoly {
    let n = a.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    let mut negate = false;
    let mut prev: IntPoly = vec![BigInt::one()];
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_empty()) else {
            return Vec::new();
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        if k + 1 == n {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = ip_sub(&ip_mul(&a[i][j], &a[k][k]), &ip_mul(&a[i][k], &a[k][j]));
                a[i][j] = ip_div_exact(&num, &prev);
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if negate {
        det.into_iter().map(|c| -c).collect()
    } else {
        det
    }
}

/// Exact determinant of a rational matrix.
pub fn determinant_rational(a: &[Vec<Rational>]) -> Rational {
    let rows: Vec<Vec<AlphaPoly>> =
        a.iter().map(|r| r.iter().map(|x| AlphaPoly::constant(x.clone())).collect()).collect();
    determinant(rows).coeff(0)
}

/// Exact positive-semidefiniteness test for a rational symmetric matrix whose nonzero
/// block is positive definite: exactly-zero rows are dropped, the rest must have
/// positive leading minors.
pub fn psd_by_zero_pattern(a: &[Vec<Rational>]) -> (bool, Vec<usize>) {
    let n = a.len();
    let zero_rows: Vec<usize> = (0..n).filter(|&i| a[i].iter().all(Zero::is_zero)).collect();
    let keep: Vec<usize> = (0..n).filter(|i| !zero_rows.contains(i)).collect();
    let block: Vec<Vec<AlphaPoly>> =
        keep.iter().map(|&i| keep.iter().map(|&j| AlphaPoly::constant(a[i][j].clone())).collect()).collect();
    if block.is_empty() {
        return (true, zero_rows);
    }
    let ok =
        principal_minors(&PolyMatrix::new(block).expect("symmetric block")).iter().all(|m| m.coeff(0).is_positive());
    (ok, zero_rows)
}

pub(crate) fn rat_str(r: &Rational) -> String {
    rational_to_string(r)
}
