use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::reduce::{accumulate, ddt_raw_factors, linear_to_expr, LinearForm};
use crate::algebra::{AlphaPoly, MomentExpr, MomentSymbol, Monomial, Rational};
use crate::error::{Error, Result};

/// Highest derivative order produced without an explicit cap.
pub const DEFAULT_MAX_ORDER: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyKind {
    Renyi,
    Tsallis,
    Shannon,
}

impl EntropyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntropyKind::Renyi => "renyi",
            EntropyKind::Tsallis => "tsallis",
            EntropyKind::Shannon => "shannon",
        }
    }
}

impl fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntropyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "renyi" | "rényi" => Ok(EntropyKind::Renyi),
            "tsallis" => Ok(EntropyKind::Tsallis),
            "shannon" => Ok(EntropyKind::Shannon),
            other => Err(Error::invalid(format!("unknown entropy kind {other:?}"))),
        }
    }
}

/// k-th time derivative of an entropy as a moment expression.
///
/// Tsallis results omit a factor `Z^normalizer_power` with `Z = ∫p^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeResult {
    pub kind: EntropyKind,
    pub order: u32,
    pub expr: MomentExpr,
    pub normalizer_power: u32,
}

fn raw_memo() -> &'static Mutex<HashMap<MomentSymbol, Arc<LinearForm>>> {
    static M: OnceLock<Mutex<HashMap<MomentSymbol, Arc<LinearForm>>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

fn ddt_raw_linear(m: &MomentSymbol) -> Arc<LinearForm> {
    if let Some(hit) = raw_memo().lock().expect("memo poisoned").get(m) {
        return hit.clone();
    }
    let v = Arc::new(ddt_raw_factors(m.factors()));
    raw_memo().lock().expect("memo poisoned").insert(m.clone(), v.clone());
    v
}

fn half_alpha_alpha_minus_one() -> AlphaPoly {
    (AlphaPoly::alpha() * AlphaPoly::alpha_plus(-1)).scale(&Rational::new(1.into(), 2.into()))
}

/// `d/dt ∫p^{α+c}∏pₙ^{kₙ}`, divided by `∫p^α`. Always product-free.
pub fn ddt_moment_raw(m: &MomentSymbol) -> MomentExpr {
    linear_to_expr(&ddt_raw_linear(m))
}

/// `d/dt E_α[m]` by the quotient rule against `Z = ∫p^α`.
pub fn ddt_moment(m: &MomentSymbol) -> MomentExpr {
    if m.is_unit() {
        return MomentExpr::zero();
    }
    let raw = ddt_moment_raw(m);
    let fisher = MomentSymbol::from_pairs(&[(1, 2)]).expect("canonical");
    raw.add(&MomentExpr::term(half_alpha_alpha_minus_one(), vec![fisher, m.clone()]))
}

/// Product rule over the symbol multisets of `e`.
pub fn ddt_expr(e: &MomentExpr) -> MomentExpr {
    let mut cache: HashMap<MomentSymbol, MomentExpr> = HashMap::new();
    let mut out = MomentExpr::zero();
    for (mono, coeff) in e.iter() {
        let syms = mono.symbols();
        let mut i = 0;
        while i < syms.len() {
            let mut j = i;
            while j < syms.len() && syms[j] == syms[i] {
                j += 1;
            }
            let mult = (j - i) as i64;
            let mut rest: Vec<MomentSymbol> = syms.to_vec();
            rest.remove(i);
            let rest = Monomial::new(rest);
            let d = cache.entry(syms[i].clone()).or_insert_with(|| ddt_moment(&syms[i]));
            let scale = coeff * &AlphaPoly::from_int(mult);
            for (m2, c2) in d.iter() {
                out.add_term(m2.times(&rest), c2 * &scale);
            }
            i = j;
        }
    }
    out
}

fn first_derivative_expr() -> MomentExpr {
    let fisher = MomentSymbol::from_pairs(&[(1, 2)]).expect("canonical");
    MomentExpr::term(AlphaPoly::alpha().scale(&Rational::new(1.into(), 2.into())), vec![fisher])
}

type DerivMemo = Mutex<HashMap<(EntropyKind, u32), Arc<DerivativeResult>>>;

fn deriv_memo() -> &'static DerivMemo {
    static M: OnceLock<DerivMemo> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memo_get(kind: EntropyKind, k: u32) -> Option<Arc<DerivativeResult>> {
    deriv_memo().lock().expect("memo poisoned").get(&(kind, k)).cloned()
}

fn memo_put(r: DerivativeResult) -> Arc<DerivativeResult> {
    let r = Arc::new(r);
    deriv_memo().lock().expect("memo poisoned").insert((r.kind, r.order), r.clone());
    r
}

fn renyi(k: u32) -> Arc<DerivativeResult> {
    if let Some(hit) = memo_get(EntropyKind::Renyi, k) {
        return hit;
    }
    let expr = if k == 1 { first_derivative_expr() } else { ddt_expr(&renyi(k - 1).expr) };
    memo_put(DerivativeResult { kind: EntropyKind::Renyi, order: k, expr, normalizer_power: 0 })
}

fn tsallis(k: u32) -> Arc<DerivativeResult> {
    if let Some(hit) = memo_get(EntropyKind::Tsallis, k) {
        return hit;
    }
    let expr = if k == 1 {
        first_derivative_expr()
    } else {
        let prev = tsallis(k - 1);
        let mut acc = LinearForm::new();
        for (mono, c) in prev.expr.iter() {
            let s = match mono.symbols() {
                [] => MomentSymbol::unit(),
                [s] => s.clone(),
                _ => unreachable!("Tsallis recursion stays product-free"),
            };
            accumulate(&mut acc, &ddt_raw_linear(&s), c);
        }
        linear_to_expr(&acc)
    };
    memo_put(DerivativeResult { kind: EntropyKind::Tsallis, order: k, expr, normalizer_power: 1 })
}

/// k-th time derivative of the entropy of the given kind, with the default order cap.
pub fn entropy_derivative(kind: EntropyKind, k: u32) -> Result<DerivativeResult> {
    entropy_derivative_with_cap(kind, k, DEFAULT_MAX_ORDER)
}

pub fn entropy_derivative_with_cap(kind: EntropyKind, k: u32, max_order: u32) -> Result<DerivativeResult> {
    if k == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    if k > max_order {
        return Err(Error::ResourceLimit { what: format!("order {k} exceeds cap {max_order}") });
    }
    Ok(match kind {
        EntropyKind::Renyi => (*renyi(k)).clone(),
        EntropyKind::Tsallis => (*tsallis(k)).clone(),
        EntropyKind::Shannon => {
            if let Some(hit) = memo_get(EntropyKind::Shannon, k) {
                return Ok((*hit).clone());
            }
            let expr = renyi(k).expr.substitute_alpha(&Rational::from_integer(1.into()));
            (*memo_put(DerivativeResult { kind, order: k, expr, normalizer_power: 0 })).clone()
        }
    })
}

/// `h'' + 2β (h')²`, the sign target for concavity of `exp(2β h_α)`.
pub fn power_concavity_expr(beta: &AlphaPoly) -> MomentExpr {
    let h1 = &renyi(1).expr;
    let h2 = &renyi(2).expr;
    h2.add(&h1.mul(h1).scale_poly(&beta.scale(&Rational::from_integer(2.into()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(p: &[(u32, u32)]) -> MomentSymbol {
        MomentSymbol::from_pairs(p).unwrap()
    }

    #[test]
    fn unit_derivatives() {
        assert!(ddt_moment(&MomentSymbol::unit()).is_zero());
        let raw = ddt_moment_raw(&MomentSymbol::unit());
        assert_eq!(raw.coefficient_of(&[sym(&[(1, 2)])]), -half_alpha_alpha_minus_one());
    }

    #[test]
    fn second_renyi_derivative() {
        let r = entropy_derivative(EntropyKind::Renyi, 2).unwrap();
        let twelfth = Rational::new(1.into(), 12.into());
        let a12 = AlphaPoly::alpha().scale(&twelfth);
        assert_eq!(r.expr.coefficient_of(&[sym(&[(1, 4)])]), &a12 * &AlphaPoly::from_roots(&[2, 3]));
        assert_eq!(r.expr.coefficient_of(&[sym(&[(2, 2)])]), &a12 * &AlphaPoly::from_int(-6));
        let f = sym(&[(1, 2)]);
        assert_eq!(
            r.expr.coefficient_of(&[f.clone(), f]),
            &a12 * &(AlphaPoly::alpha() * AlphaPoly::alpha_plus(-1)).scale(&Rational::from_integer(3.into()))
        );
        assert_eq!(r.expr.len(), 3);
    }

    #[test]
    fn zero_order_rejected_and_cap() {
        assert!(entropy_derivative(EntropyKind::Renyi, 0).is_err());
        assert!(matches!(entropy_derivative_with_cap(EntropyKind::Tsallis, 5, 4), Err(Error::ResourceLimit { .. })));
    }
}
