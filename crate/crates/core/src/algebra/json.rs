//! Shared JSON encoding: coefficients ascending in α as `"p/q"` strings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::moment::{FactorMap, MomentExpr, MomentSymbol, MomentTerm};
use super::poly::AlphaPoly;
use super::rational::{parse_rational, rational_to_string};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolyJson(pub Vec<String>);

impl From<&AlphaPoly> for PolyJson {
    fn from(p: &AlphaPoly) -> Self {
        PolyJson(p.coeffs().iter().map(rational_to_string).collect())
    }
}

impl PolyJson {
    pub fn to_poly(&self) -> Result<AlphaPoly> {
        Ok(AlphaPoly::new(self.0.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolPowerJson {
    pub factors: BTreeMap<String, u32>,
    pub power: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: PolyJson,
    pub symbols: Vec<SymbolPowerJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExprJson {
    pub terms: Vec<TermJson>,
}

fn symbol_json(s: &MomentSymbol, power: u32) -> SymbolPowerJson {
    SymbolPowerJson { factors: s.factors().iter().map(|(n, k)| (n.to_string(), *k)).collect(), power }
}

impl From<&MomentExpr> for ExprJson {
    fn from(e: &MomentExpr) -> Self {
        let terms = e
            .iter()
            .map(|(m, c)| {
                let mut symbols: Vec<SymbolPowerJson> = Vec::new();
                let syms = m.symbols();
                let mut i = 0;
                while i < syms.len() {
                    let mut j = i;
                    while j < syms.len() && syms[j] == syms[i] {
                        j += 1;
                    }
                    symbols.push(symbol_json(&syms[i], (j - i) as u32));
                    i = j;
                }
                TermJson { coeff: PolyJson::from(c), symbols }
            })
            .collect();
        ExprJson { terms }
    }
}

impl ExprJson {
    pub fn to_expr(&self) -> Result<MomentExpr> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let coefficient = t.coeff.to_poly()?;
            let mut symbols = Vec::new();
            for s in &t.symbols {
                let mut f = FactorMap::new();
                for (n, k) in &s.factors {
                    let n: u32 = n.parse().map_err(|_| Error::parse(format!("bad order {n:?}")))?;
                    f.insert(n, *k);
                }
                let sym = MomentSymbol::make(f)?;
                for _ in 0..s.power {
                    symbols.push(sym.clone());
                }
            }
            terms.push(MomentTerm { coefficient, symbols });
        }
        Ok(MomentExpr::from_terms(terms))
    }
}

impl MomentExpr {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ExprJson::from(self)).expect("expression serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: ExprJson = serde_json::from_value(v.clone()).map_err(|e| Error::parse(e.to_string()))?;
        j.to_expr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn round_trip() {
        let a = MomentSymbol::from_pairs(&[(1, 2)]).unwrap();
        let b = MomentSymbol::from_pairs(&[(1, 4)]).unwrap();
        let e = MomentExpr::term(AlphaPoly::from_ints_over(&[0, 3, -1], 4), vec![a.clone(), a.clone()])
            .add(&MomentExpr::term(AlphaPoly::constant(rat(-6, 1)), vec![b]));
        let v = e.to_json();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"power\":2"));
        assert!(s.contains("\"3/4\""));
        assert_eq!(MomentExpr::from_json(&v).unwrap(), e);
    }
}
