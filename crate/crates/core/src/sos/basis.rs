use std::fmt;

use crate::algebra::{FactorMap, MomentExpr, MomentSymbol, Monomial, RawIntegral};
use crate::calculus::{reduce_raw_integral, EntropyKind};
use crate::error::{Error, Result};

/// One entry of the Gram vector: a pointwise p̄-monomial times scalar moments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramBasisElement {
    pub pointwise: FactorMap,
    pub scalar_moments: Vec<MomentSymbol>,
}

impl GramBasisElement {
    pub fn new(pointwise: &[(u32, u32)], scalar_moments: Vec<MomentSymbol>) -> Self {
        let mut scalar_moments = scalar_moments;
        scalar_moments.retain(|s| !s.is_unit());
        scalar_moments.sort();
        GramBasisElement { pointwise: pointwise.iter().copied().collect(), scalar_moments }
    }

    pub fn total_order(&self) -> u32 {
        let pw: u32 = self.pointwise.iter().map(|(n, k)| n * k).sum();
        pw + self.scalar_moments.iter().map(MomentSymbol::total_order).sum::<u32>()
    }

    pub fn has_scalars(&self) -> bool {
        !self.scalar_moments.is_empty()
    }

    /// `E_α[self · other]` with scalar multipliers pulled out of the expectation.
    pub fn pair_expectation(&self, other: &GramBasisElement) -> MomentExpr {
        let mut f = self.pointwise.clone();
        for (n, k) in &other.pointwise {
            *f.entry(*n).or_insert(0) += k;
        }
        let inner = reduce_raw_integral(&RawIntegral::balanced(f));
        let mut scalars = self.scalar_moments.clone();
        scalars.extend(other.scalar_moments.iter().cloned());
        inner.mul_monomial(&Monomial::new(scalars))
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self.scalar_moments.iter().map(|s| s.render()).collect();
        for (n, k) in &self.pointwise {
            parts.push(if *k == 1 { format!("p̄{n}") } else { format!("p̄{n}^{k}") });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

impl fmt::Display for GramBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn sym(pairs: &[(u32, u32)]) -> MomentSymbol {
    MomentSymbol::from_pairs(pairs).expect("canonical literal")
}

/// Bases used for the k = 2, 3, 4 matching problems.
pub fn default_gram_basis(k: u32, kind: EntropyKind) -> Result<Vec<GramBasisElement>> {
    let e = GramBasisElement::new;
    let m2 = || sym(&[(1, 2)]);
    let full = match k {
        2 => vec![e(&[(2, 1)], vec![]), e(&[(1, 2)], vec![]), e(&[], vec![m2()])],
        3 => vec![e(&[(3, 1)], vec![]), e(&[(1, 1), (2, 1)], vec![]), e(&[(1, 3)], vec![]), e(&[(1, 1)], vec![m2()])],
        4 => vec![
            e(&[(4, 1)], vec![]),
            e(&[(1, 1), (3, 1)], vec![]),
            e(&[(2, 2)], vec![]),
            e(&[(1, 2), (2, 1)], vec![]),
            e(&[(1, 4)], vec![]),
            e(&[], vec![sym(&[(1, 4)])]),
            e(&[(2, 1)], vec![m2()]),
            e(&[], vec![sym(&[(2, 2)])]),
            e(&[], vec![m2(), m2()]),
            e(&[(1, 2)], vec![m2()]),
        ],
        _ => return Err(Error::Unsupported { what: format!("no default Gram basis for order {k}") }),
    };
    Ok(match kind {
        EntropyKind::Tsallis => full.into_iter().filter(|b| !b.has_scalars()).collect(),
        _ => full,
    })
}

/// Default nonnegative slack products for the scalar-moment problems.
pub fn default_slacks(k: u32, kind: EntropyKind) -> Vec<Vec<MomentSymbol>> {
    if kind == EntropyKind::Tsallis {
        return Vec::new();
    }
    let m2 = || sym(&[(1, 2)]);
    match k {
        3 => vec![vec![sym(&[(1, 4)]), m2()], vec![m2(), sym(&[(2, 2)])]],
        4 => vec![
            vec![sym(&[(1, 6)]), m2()],
            vec![m2(), sym(&[(1, 2), (2, 2)])],
            vec![sym(&[(1, 4)]), sym(&[(2, 2)])],
            vec![m2(), sym(&[(3, 2)])],
        ],
        _ => Vec::new(),
    }
}

/// Parses `E[p1^4]E[p1^2]; E[p1^2]E[p2^2]` into slack products.
///
/// `p̄` is accepted in place of `p`. An empty string gives no slacks.
pub fn parse_slack_spec(s: &str) -> Result<Vec<Vec<MomentSymbol>>> {
    let mut out = Vec::new();
    for product in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let mut syms = Vec::new();
        let mut rest = product;
        while let Some(start) = rest.find("E[") {
            let tail = &rest[start + 2..];
            let end = tail.find(']').ok_or_else(|| Error::parse(format!("unclosed E[ in {product:?}")))?;
            syms.push(parse_symbol_body(&tail[..end])?);
            rest = &tail[end + 1..];
        }
        if syms.is_empty() || !rest.trim().is_empty() {
            return Err(Error::parse(format!("bad slack product {product:?}")));
        }
        out.push(syms);
    }
    Ok(out)
}

fn parse_symbol_body(body: &str) -> Result<MomentSymbol> {
    let mut f = FactorMap::new();
    for tok in body.split_whitespace() {
        let tok = tok.replace("p̄", "p");
        let t = tok.strip_prefix('p').ok_or_else(|| Error::parse(format!("bad factor {tok:?}")))?;
        let (n, k) = match t.split_once('^') {
            Some((n, k)) => (n, k),
            None => (t, "1"),
        };
        let n: u32 = n.parse().map_err(|_| Error::parse(format!("bad order in {tok:?}")))?;
        let k: u32 = k.parse().map_err(|_| Error::parse(format!("bad exponent in {tok:?}")))?;
        *f.entry(n).or_insert(0) += k;
    }
    MomentSymbol::make(f)
}
