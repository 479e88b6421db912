use std::collections::BTreeMap;

use serde::Serialize;

use super::basis::GramBasisElement;
use crate::algebra::{AlphaPoly, MomentExpr, MomentSymbol, Monomial, PolyJson, Rational};
use crate::calculus::{DerivativeResult, EntropyKind};
use crate::error::{Error, Result};

/// A nonnegative product of moments entering with coefficient `sign · c`, `c ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlackTerm {
    pub expr: MomentExpr,
    pub sign: i8,
}

impl SlackTerm {
    pub fn product(symbols: Vec<MomentSymbol>) -> Self {
        SlackTerm { expr: MomentExpr::term(AlphaPoly::one(), symbols), sign: 1 }
    }
}

/// `Σ coeffs[v]·x_v = rhs` for one moment product.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub monomial: Monomial,
    pub coeffs: Vec<AlphaPoly>,
    pub rhs: AlphaPoly,
}

/// Coefficient matching of `E_α[zᵀAz] + Σ cⱼ·slackⱼ` against a target.
///
/// Variables are the upper triangle of A, row by row, followed by the slacks.
#[derive(Clone, Debug)]
pub struct GramProblem {
    pub order: u32,
    pub kind: Option<EntropyKind>,
    pub basis: Vec<GramBasisElement>,
    pub target: MomentExpr,
    pub slack_terms: Vec<SlackTerm>,
    pub constraints: Vec<Constraint>,
    /// Preferred free parameters for the symbolic parametrization.
    pub free_hint: Option<Vec<String>>,
}

/// `constant + Σ coeffs[f]·x_f` over free variables `f`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Affine {
    pub constant: AlphaPoly,
    pub coeffs: BTreeMap<usize, AlphaPoly>,
}

impl Affine {
    fn var(v: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, AlphaPoly::one());
        Affine { constant: AlphaPoly::zero(), coeffs }
    }

    /// Value once every free variable is replaced by a polynomial.
    pub fn evaluate(&self, values: &BTreeMap<usize, AlphaPoly>) -> Option<AlphaPoly> {
        let mut out = self.constant.clone();
        for (v, c) in &self.coeffs {
            out = &out + &(c * values.get(v)?);
        }
        Some(out)
    }
}

/// Every variable written affinely in a chosen set of free variables.
#[derive(Clone, Debug)]
pub struct Parametrization {
    pub free: Vec<usize>,
    pub dependent: Vec<usize>,
    /// Indexed by variable.
    pub forms: Vec<Affine>,
    /// Left over equations in the free variables alone, each must vanish.
    pub residuals: Vec<Affine>,
}

pub fn entry_name(i: usize, j: usize) -> String {
    let (i, j) = (i.min(j) + 1, i.max(j) + 1);
    if i < 10 && j < 10 {
        format!("b{i}{j}")
    } else {
        format!("b{i}_{j}")
    }
}

fn sign_scale(kind: EntropyKind, k: u32) -> Result<(AlphaPoly, bool)> {
    // (−1)^{k−1}·12/α, returned as (numerator, divide-by-α)
    let s = if k % 2 == 1 { 12 } else { -12 };
    Ok((AlphaPoly::from_int(s), kind != EntropyKind::Shannon))
}

/// Matching problem for an entropy derivative, normalized to `(−1)^{k−1}(12/α)·h⁽ᵏ⁾`.
pub fn build_gram_problem(
    target: &DerivativeResult,
    basis: &[GramBasisElement],
    slacks: &[Vec<MomentSymbol>],
) -> Result<GramProblem> {
    let (s, by_alpha) = sign_scale(target.kind, target.order)?;
    let mut t = target.expr.scale_poly(&s);
    if by_alpha {
        t = t
            .div_exact(&AlphaPoly::alpha())
            .ok_or_else(|| Error::Unsupported { what: "target coefficients are not divisible by α".into() })?;
    }
    let mut p = build_for_target(&t, target.order, basis, slacks)?;
    p.kind = Some(target.kind);
    if let Some(names) = crate::catalog::paper_free_parameters(target.order, target.kind, basis, slacks) {
        p.free_hint = Some(names);
    }
    Ok(p)
}

/// Matching problem for an already normalized target `E_α[zᵀAz] + Σ cⱼ·slackⱼ = target`.
pub fn build_for_target(
    target: &MomentExpr,
    order: u32,
    basis: &[GramBasisElement],
    slacks: &[Vec<MomentSymbol>],
) -> Result<GramProblem> {
    build_inner(target, order, basis, slacks, None)
}

/// Same system built with α fixed before matching. Used to check symbolic instantiation.
pub fn build_for_target_at(
    target: &MomentExpr,
    order: u32,
    basis: &[GramBasisElement],
    slacks: &[Vec<MomentSymbol>],
    alpha: &Rational,
) -> Result<GramProblem> {
    build_inner(target, order, basis, slacks, Some(alpha))
}

fn check_order(target: &MomentExpr, order: u32, basis: &[GramBasisElement]) -> Result<()> {
    if basis.is_empty() {
        return Err(Error::invalid("empty Gram basis"));
    }
    if let Some(b) = basis.iter().find(|b| b.total_order() != order) {
        return Err(Error::OrderMismatch {
            what: format!("basis element {} has order {}, expected {order}", b.render(), b.total_order()),
        });
    }
    if let Some((m, _)) = target.iter().find(|(m, _)| m.total_order() != 2 * order) {
        return Err(Error::OrderMismatch {
            what: format!("target term of order {} in a problem of order {}", m.total_order(), 2 * order),
        });
    }
    Ok(())
}

fn build_inner(
    target: &MomentExpr,
    order: u32,
    basis: &[GramBasisElement],
    slacks: &[Vec<MomentSymbol>],
    alpha: Option<&Rational>,
) -> Result<GramProblem> {
    check_order(target, order, basis)?;
    let fix = |e: MomentExpr| match alpha {
        Some(a) => e.substitute_alpha(a),
        None => e,
    };
    let n = basis.len();
    let slack_terms: Vec<SlackTerm> = slacks.iter().map(|s| SlackTerm::product(s.clone())).collect();
    for s in &slack_terms {
        if let Some((m, _)) = s.expr.iter().find(|(m, _)| m.total_order() != 2 * order) {
            return Err(Error::OrderMismatch {
                what: format!("slack product of order {} in a problem of order {}", m.total_order(), 2 * order),
            });
        }
    }
    let nvars = n * (n + 1) / 2 + slack_terms.len();
    let mut columns: Vec<MomentExpr> = Vec::with_capacity(nvars);
    for i in 0..n {
        for j in i..n {
            let e = basis[i].pair_expectation(&basis[j]);
            columns.push(fix(if i == j { e } else { e.scale(&Rational::from_integer(2.into())) }));
        }
    }
    for s in &slack_terms {
        columns.push(fix(s.expr.scale(&Rational::from_integer(s.sign.into()))));
    }
    let target = fix(target.clone());

    let mut rows: BTreeMap<Monomial, (Vec<AlphaPoly>, AlphaPoly)> = BTreeMap::new();
    let blank = || (vec![AlphaPoly::zero(); nvars], AlphaPoly::zero());
    for (v, col) in columns.iter().enumerate() {
        for (m, c) in col.iter() {
            rows.entry(m.clone()).or_insert_with(blank).0[v] = c.clone();
        }
    }
    for (m, c) in target.iter() {
        rows.entry(m.clone()).or_insert_with(blank).1 = c.clone();
    }
    let constraints = rows.into_iter().map(|(monomial, (coeffs, rhs))| Constraint { monomial, coeffs, rhs }).collect();
    Ok(GramProblem { order, kind: None, basis: basis.to_vec(), target, slack_terms, constraints, free_hint: None })
}

impl GramProblem {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn num_entries(&self) -> usize {
        let n = self.size();
        n * (n + 1) / 2
    }

    pub fn num_vars(&self) -> usize {
        self.num_entries() + self.slack_terms.len()
    }

    /// Variable index of `A[i][j]`.
    pub fn entry_var(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        let n = self.size();
        i * n - i * i.saturating_sub(1) / 2 + j - i
    }

    /// `(i, j)` for an entry variable, `None` for a slack.
    pub fn var_entry(&self, v: usize) -> Option<(usize, usize)> {
        let n = self.size();
        let mut v = v;
        for i in 0..n {
            if v < n - i {
                return Some((i, i + v));
            }
            v -= n - i;
        }
        None
    }

    pub fn var_name(&self, v: usize) -> String {
        match self.var_entry(v) {
            Some((i, j)) => entry_name(i, j),
            None => format!("c{}", v - self.num_entries() + 1),
        }
    }

    pub fn var_names(&self) -> Vec<String> {
        (0..self.num_vars()).map(|v| self.var_name(v)).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        (0..self.num_vars()).find(|&v| self.var_name(v) == name)
    }

    /// Constraint system at a numeric α: `(rows, rhs)`.
    pub fn instantiate(&self, alpha: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let rows = self.constraints.iter().map(|c| c.coeffs.iter().map(|p| p.eval_f64(alpha)).collect()).collect();
        let rhs = self.constraints.iter().map(|c| c.rhs.eval_f64(alpha)).collect();
        (rows, rhs)
    }

    /// Exact constraint system at a rational α.
    pub fn instantiate_exact(&self, alpha: &Rational) -> Vec<(Vec<Rational>, Rational)> {
        self.constraints.iter().map(|c| (c.coeffs.iter().map(|p| p.eval(alpha)).collect(), c.rhs.eval(alpha))).collect()
    }

    /// Largest row residual, each row scaled by its largest coefficient.
    pub fn residual(&self, alpha: f64, x: &[f64]) -> f64 {
        let (rows, rhs) = self.instantiate(alpha);
        rows.iter()
            .zip(&rhs)
            .map(|(r, b)| {
                let scale = r.iter().chain(std::iter::once(b)).fold(1.0f64, |m, v| m.max(v.abs()));
                (r.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b).abs() / scale
            })
            .fold(0.0, f64::max)
    }

    /// Solve the constraints symbolically for a set of dependent variables.
    ///
    /// With `free = None` the hint from construction is used, otherwise pivots are
    /// picked greedily (diagonal entries first, slacks last).
    pub fn parametrize(&self, free: Option<&[String]>) -> Result<Parametrization> {
        let nv = self.num_vars();
        let names: Option<Vec<String>> = free.map(|f| f.to_vec()).or_else(|| self.free_hint.clone());
        let mut is_free = vec![false; nv];
        if let Some(names) = &names {
            for nm in names {
                let v = self.var_index(nm).ok_or_else(|| Error::UnresolvedParameter { name: nm.clone() })?;
                is_free[v] = true;
            }
        }
        let fixed_free = names.is_some();
        // preference order for pivots
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by_key(|&v| match self.var_entry(v) {
            Some((i, j)) if i == j => (0, v),
            Some(_) => (1, v),
            None => (2, v),
        });

        let mut rows: Vec<(Vec<AlphaPoly>, AlphaPoly)> =
            self.constraints.iter().map(|c| (c.coeffs.clone(), c.rhs.clone())).collect();
        let mut pivot_of_row: Vec<Option<usize>> = vec![None; rows.len()];
        let mut is_dep = vec![false; nv];
        let mut progress = true;
        while progress {
            progress = false;
            for r in 0..rows.len() {
                if pivot_of_row[r].is_some() {
                    continue;
                }
                let pick = order
                    .iter()
                    .copied()
                    .find(|&v| !is_free[v] && !is_dep[v] && rows[r].0[v].is_constant() && !rows[r].0[v].is_zero());
                let Some(v) = pick else { continue };
                let inv = AlphaPoly::constant(num_traits::Inv::inv(rows[r].0[v].coeff(0)));
                let pc: Vec<AlphaPoly> = rows[r].0.iter().map(|c| c * &inv).collect();
                let pr = &rows[r].1 * &inv;
                for (q, row) in rows.iter_mut().enumerate() {
                    if q == r || row.0[v].is_zero() {
                        continue;
                    }
                    let f = row.0[v].clone();
                    for (c, p) in row.0.iter_mut().zip(&pc) {
                        if !p.is_zero() {
                            *c = &*c - &(&f * p);
                        }
                    }
                    row.1 = &row.1 - &(&f * &pr);
                }
                rows[r] = (pc, pr);
                pivot_of_row[r] = Some(v);
                is_dep[v] = true;
                progress = true;
            }
        }
        if fixed_free {
            if let Some(v) = (0..nv).find(|&v| !is_free[v] && !is_dep[v]) {
                return Err(Error::UnresolvedParameter { name: self.var_name(v) });
            }
        }
        let free: Vec<usize> = (0..nv).filter(|&v| !is_dep[v]).collect();
        let mut forms: Vec<Affine> = (0..nv).map(Affine::var).collect();
        let mut residuals = Vec::new();
        for (r, (coeffs, rhs)) in rows.iter().enumerate() {
            let mut a = Affine { constant: rhs.clone(), coeffs: BTreeMap::new() };
            match pivot_of_row[r] {
                Some(v) => {
                    for &f in &free {
                        if !coeffs[f].is_zero() {
                            a.coeffs.insert(f, -&coeffs[f]);
                        }
                    }
                    forms[v] = a;
                }
                None => {
                    a.constant = -&a.constant;
                    for &f in &free {
                        if !coeffs[f].is_zero() {
                            a.coeffs.insert(f, coeffs[f].clone());
                        }
                    }
                    if !a.constant.is_zero() || !a.coeffs.is_empty() {
                        residuals.push(a);
                    }
                }
            }
        }
        let dependent = (0..nv).filter(|&v| is_dep[v]).collect();
        Ok(Parametrization { free, dependent, forms, residuals })
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct C {
            monomial: String,
            coeffs: BTreeMap<String, PolyJson>,
            rhs: PolyJson,
        }
        let names = self.var_names();
        let cs: Vec<C> = self
            .constraints
            .iter()
            .map(|c| C {
                monomial: c.monomial.symbols().iter().map(MomentSymbol::render).collect::<Vec<_>>().join(" "),
                coeffs: c
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(v, p)| (names[v].clone(), PolyJson::from(p)))
                    .collect(),
                rhs: PolyJson::from(&c.rhs),
            })
            .collect();
        serde_json::json!({
            "order": self.order,
            "kind": self.kind.map(|k| k.as_str()),
            "basis": self.basis.iter().map(|b| b.render()).collect::<Vec<_>>(),
            "slacks": self.slack_terms.iter().map(|s| s.expr.render()).collect::<Vec<_>>(),
            "variables": names,
            "target": self.target.to_json(),
            "constraints": cs,
        })
    }
}
