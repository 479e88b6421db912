use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::poly::AlphaPoly;
use super::rational::Rational;
use crate::error::{Error, Result};

/// Derivative order `n ≥ 1` mapped to its exponent `k ≥ 1`.
pub type FactorMap = BTreeMap<u32, u32>;

fn total_order(f: &FactorMap) -> u32 {
    f.iter().map(|(n, k)| n * k).sum()
}

fn render_factors(f: &FactorMap) -> String {
    if f.is_empty() {
        return "1".into();
    }
    f.iter().map(|(n, k)| if *k == 1 { format!("p̄{n}") } else { format!("p̄{n}^{k}") }).collect::<Vec<_>>().join(" ")
}

fn factors_key(f: &FactorMap) -> String {
    let parts: Vec<String> = f.iter().map(|(n, k)| format!("{n}:{k}")).collect();
    format!("{{{}}}", parts.join(","))
}

/// Canonical when empty, or when the highest order present carries an exponent ≥ 2.
pub fn is_canonical(f: &FactorMap) -> bool {
    match f.iter().next_back() {
        None => true,
        Some((_, &k)) => k >= 2,
    }
}

/// Normalized moment `E_α[∏ p̄ₙ^{kₙ}]` with `p̄ₙ = pₙ / p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MomentSymbol {
    factors: FactorMap,
}

impl MomentSymbol {
    /// Accepts only canonical factor maps.
    pub fn make(factors: FactorMap) -> Result<Self> {
        if factors.iter().any(|(&n, &k)| n == 0 || k == 0) {
            return Err(Error::invalid("orders and exponents must be at least 1"));
        }
        if !is_canonical(&factors) {
            return Err(Error::NonCanonical { factors: factors_key(&factors) });
        }
        Ok(MomentSymbol { factors })
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        Self::make(pairs.iter().copied().collect())
    }

    pub(crate) fn from_canonical(factors: FactorMap) -> Self {
        debug_assert!(is_canonical(&factors));
        MomentSymbol { factors }
    }

    pub fn unit() -> Self {
        MomentSymbol { factors: FactorMap::new() }
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &FactorMap {
        &self.factors
    }

    /// Total derivative order `D = Σ n·kₙ`.
    pub fn total_order(&self) -> u32 {
        total_order(&self.factors)
    }

    pub fn render(&self) -> String {
        format!("E[{}]", render_factors(&self.factors))
    }

    pub fn key(&self) -> String {
        factors_key(&self.factors)
    }
}

impl Ord for MomentSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_order().cmp(&other.total_order()).then_with(|| self.factors.cmp(&other.factors))
    }
}

impl PartialOrd for MomentSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MomentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Sorted multiset of non-unit symbols; the empty product is the constant monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<MomentSymbol>);

impl Monomial {
    pub fn new(mut syms: Vec<MomentSymbol>) -> Self {
        syms.retain(|s| !s.is_unit());
        syms.sort();
        Monomial(syms)
    }

    pub fn symbols(&self) -> &[MomentSymbol] {
        &self.0
    }

    pub fn total_order(&self) -> u32 {
        self.0.iter().map(MomentSymbol::total_order).sum()
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Monomial::new(v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_order()
            .cmp(&other.total_order())
            .then_with(|| self.0.len().cmp(&other.0.len()))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentTerm {
    pub coefficient: AlphaPoly,
    pub symbols: Vec<MomentSymbol>,
}

impl MomentTerm {
    pub fn monomial(&self) -> Monomial {
        Monomial::new(self.symbols.clone())
    }
}

/// Polynomial combination of moment products.
///
/// Terms are kept merged, nonzero and in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MomentExpr {
    terms: BTreeMap<Monomial, AlphaPoly>,
}

impl MomentExpr {
    pub fn zero() -> Self {
        MomentExpr::default()
    }

    pub fn constant(c: AlphaPoly) -> Self {
        let mut e = MomentExpr::zero();
        e.add_term(Monomial::default(), c);
        e
    }

    pub fn symbol(s: MomentSymbol) -> Self {
        Self::term(AlphaPoly::one(), vec![s])
    }

    pub fn term(c: AlphaPoly, syms: Vec<MomentSymbol>) -> Self {
        let mut e = MomentExpr::zero();
        e.add_term(Monomial::new(syms), c);
        e
    }

    /// Builds an expression from possibly repeated or zero terms.
    pub fn from_terms(terms: impl IntoIterator<Item = MomentTerm>) -> Self {
        let mut e = MomentExpr::zero();
        for t in terms {
            e.add_term(t.monomial(), t.coefficient);
        }
        e
    }

    pub fn add_term(&mut self, m: Monomial, c: AlphaPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &AlphaPoly)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> Vec<MomentTerm> {
        self.terms.iter().map(|(m, c)| MomentTerm { coefficient: c.clone(), symbols: m.symbols().to_vec() }).collect()
    }

    pub fn coefficient_of(&self, syms: &[MomentSymbol]) -> AlphaPoly {
        self.terms.get(&Monomial::new(syms.to_vec())).cloned().unwrap_or_else(AlphaPoly::zero)
    }

    /// Merge like terms and drop zeros. Construction already does this, so this is a
    /// rebuild that exists for inputs assembled term-by-term elsewhere.
    pub fn normalize(&self) -> Self {
        Self::from_terms(self.terms())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_poly(&AlphaPoly::from_int(-1)))
    }

    pub fn scale_poly(&self, p: &AlphaPoly) -> Self {
        let mut out = MomentExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * p);
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.scale_poly(&AlphaPoly::constant(r.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = MomentExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.times(m2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        let mut out = MomentExpr::zero();
        for (m1, c1) in &self.terms {
            out.add_term(m1.times(m), c1.clone());
        }
        out
    }

    /// Divide every coefficient by `d`, if it divides all of them exactly.
    pub fn div_exact(&self, d: &AlphaPoly) -> Option<Self> {
        let mut out = MomentExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.div_exact(d)?);
        }
        Some(out)
    }

    /// Substitute a rational value for α in every coefficient.
    pub fn substitute_alpha(&self, x: &Rational) -> Self {
        let mut out = MomentExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.substitute(x));
        }
        out
    }

    /// Distinct symbols appearing anywhere in the expression.
    pub fn symbols(&self) -> Vec<MomentSymbol> {
        let mut v: Vec<MomentSymbol> = self.terms.keys().flat_map(|m| m.symbols().iter().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn is_product_free(&self) -> bool {
        self.terms.keys().all(|m| m.symbols().len() <= 1)
    }

    pub fn max_symbols_per_term(&self) -> usize {
        self.terms.keys().map(|m| m.symbols().len()).max().unwrap_or(0)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let body: Vec<String> = m.symbols().iter().map(MomentSymbol::render).collect();
            let coeff = if c.coeffs().len() == 1 { c.render() } else { format!("({})", c.render()) };
            if body.is_empty() {
                parts.push(coeff);
            } else {
                parts.push(format!("{coeff}·{}", body.join("·")));
            }
        }
        parts.join(" + ")
    }

    /// True when `c` is zero for every coefficient, used by tests.
    pub fn all_coefficients_zero(&self) -> bool {
        self.terms.values().all(|c| c.coeffs().iter().all(Zero::is_zero))
    }
}

impl fmt::Display for MomentExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Un-normalized `∫ p^{α+c} ∏ pₙ^{kₙ} dx`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawIntegral {
    offset: i64,
    factors: FactorMap,
}

impl RawIntegral {
    /// Rejects maps whose offset does not balance the exponents (`c = −Σ kₙ`).
    pub fn new(offset: i64, factors: FactorMap) -> Result<Self> {
        if factors.iter().any(|(&n, &k)| n == 0 || k == 0) {
            return Err(Error::invalid("orders and exponents must be at least 1"));
        }
        let expected = -(factors.values().map(|&k| k as i64).sum::<i64>());
        if offset != expected {
            return Err(Error::HomogeneityViolation { offset, expected });
        }
        Ok(RawIntegral { offset, factors })
    }

    /// The balanced integral for a factor map.
    pub fn balanced(factors: FactorMap) -> Self {
        let offset = -(factors.values().map(|&k| k as i64).sum::<i64>());
        RawIntegral { offset, factors }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn factors(&self) -> &FactorMap {
        &self.factors
    }

    pub fn total_order(&self) -> u32 {
        total_order(&self.factors)
    }

    pub fn render(&self) -> String {
        let a = match self.offset {
            0 => "p^α".to_string(),
            c if c < 0 => format!("p^(α{c})"),
            c => format!("p^(α+{c})"),
        };
        let f: Vec<String> =
            self.factors.iter().map(|(n, k)| if *k == 1 { format!("p{n}") } else { format!("p{n}^{k}") }).collect();
        if f.is_empty() {
            format!("∫{a} dx")
        } else {
            format!("∫{a} {} dx", f.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(p: &[(u32, u32)]) -> MomentSymbol {
        MomentSymbol::from_pairs(p).unwrap()
    }

    #[test]
    fn canonicality() {
        assert!(MomentSymbol::from_pairs(&[(1, 4)]).is_ok());
        assert!(MomentSymbol::from_pairs(&[]).unwrap().is_unit());
        assert!(matches!(MomentSymbol::from_pairs(&[(2, 1)]), Err(Error::NonCanonical { .. })));
        assert!(MomentSymbol::from_pairs(&[(1, 1)]).is_err());
        assert!(MomentSymbol::from_pairs(&[(1, 3), (2, 2)]).is_ok());
        assert!(MomentSymbol::from_pairs(&[(1, 3), (2, 1)]).is_err());
    }

    #[test]
    fn normalize_merges_and_drops() {
        let s = sym(&[(1, 2)]);
        let t = sym(&[(2, 2)]);
        let e = MomentExpr::from_terms(vec![
            MomentTerm { coefficient: AlphaPoly::from_int(2), symbols: vec![s.clone()] },
            MomentTerm { coefficient: AlphaPoly::from_int(-1), symbols: vec![s.clone()] },
            MomentTerm { coefficient: AlphaPoly::alpha() - AlphaPoly::alpha(), symbols: vec![t.clone()] },
        ]);
        assert_eq!(e, MomentExpr::symbol(s.clone()));
        let a = MomentExpr::term(AlphaPoly::one(), vec![s.clone(), t.clone()]);
        let b = MomentExpr::term(AlphaPoly::one(), vec![t, s]);
        assert_eq!(a, b);
        assert_eq!(a.normalize(), a);
    }

    #[test]
    fn homogeneity_checked() {
        let f: FactorMap = [(1, 2), (2, 1)].into_iter().collect();
        assert!(RawIntegral::new(-3, f.clone()).is_ok());
        assert!(matches!(RawIntegral::new(-2, f), Err(Error::HomogeneityViolation { .. })));
    }

    #[test]
    fn ordering_by_total_order_first() {
        let a = sym(&[(2, 2)]);
        let b = sym(&[(1, 6)]);
        let c = sym(&[(1, 4)]);
        let mut v = vec![a.clone(), b.clone(), c.clone()];
        v.sort();
        assert_eq!(v, vec![c, a, b]);
    }
}
