use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;

use crate::algebra::{is_canonical, AlphaPoly, FactorMap, MomentExpr, MomentSymbol, Monomial, Rational, RawIntegral};

/// Product-free combination `Σ cₛ·E[s]`.
pub type LinearForm = BTreeMap<MomentSymbol, AlphaPoly>;

type Cache = RwLock<HashMap<FactorMap, Arc<LinearForm>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn accumulate(into: &mut LinearForm, from: &LinearForm, scale: &AlphaPoly) {
    for (s, c) in from {
        let add = c * scale;
        match into.get_mut(s) {
            Some(existing) => {
                let sum = &*existing + &add;
                if sum.is_zero() {
                    into.remove(s);
                } else {
                    *existing = sum;
                }
            }
            None => {
                if !add.is_zero() {
                    into.insert(s.clone(), add);
                }
            }
        }
    }
}

fn bump(f: &mut FactorMap, n: u32, by: i64) {
    let e = f.entry(n).or_insert(0);
    let v = *e as i64 + by;
    debug_assert!(v >= 0);
    if v == 0 {
        f.remove(&n);
    } else {
        *e = v as u32;
    }
}

fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Reduce the balanced integral `∫ p^{α−Σk} ∏ pₙ^{kₙ}` to canonical moments, normalized by `∫p^α`.
pub fn reduce_factors(f: &FactorMap) -> Arc<LinearForm> {
    if let Some(hit) = cache().read().expect("reduction cache poisoned").get(f) {
        return hit.clone();
    }
    let out = Arc::new(reduce_uncached(f));
    cache().write().expect("reduction cache poisoned").insert(f.clone(), out.clone());
    out
}

fn reduce_uncached(f: &FactorMap) -> LinearForm {
    let mut out = LinearForm::new();
    let Some((&top, &k_top)) = f.iter().next_back() else {
        out.insert(MomentSymbol::unit(), AlphaPoly::one());
        return out;
    };
    if is_canonical(f) {
        out.insert(MomentSymbol::from_canonical(f.clone()), AlphaPoly::one());
        return out;
    }
    debug_assert_eq!(k_top, 1);
    if top == 1 {
        // ∫ p^{α−1} p₁ = (1/α) [p^α] vanishes at the boundary.
        return out;
    }
    let offset: i64 = -(f.values().map(|&k| k as i64).sum::<i64>());
    let e = f.get(&(top - 1)).copied().unwrap_or(0) as i64;
    // u·p_{N−1}^e·p_N = u·d(p_{N−1}^{e+1})/(e+1); move the derivative onto u.
    let mut u = f.clone();
    u.remove(&top);
    u.remove(&(top - 1));
    let mut base = u.clone();
    base.insert(top - 1, (e + 1) as u32);

    let mut from_power = base.clone();
    bump(&mut from_power, 1, 1);
    let c_power = AlphaPoly::alpha_plus(offset).scale(&ratio(-1, e + 1));
    accumulate(&mut out, &reduce_factors(&from_power), &c_power);

    for (&n, &k) in &u {
        let mut g = base.clone();
        bump(&mut g, n, -1);
        bump(&mut g, n + 1, 1);
        let c = AlphaPoly::constant(ratio(-(k as i64), e + 1));
        accumulate(&mut out, &reduce_factors(&g), &c);
    }
    out
}

pub(crate) fn linear_to_expr(l: &LinearForm) -> MomentExpr {
    let mut e = MomentExpr::zero();
    for (s, c) in l {
        e.add_term(Monomial::new(vec![s.clone()]), c.clone());
    }
    e
}

/// Canonical form of `r / ∫p^α`.
pub fn reduce_raw_integral(r: &RawIntegral) -> MomentExpr {
    linear_to_expr(&reduce_factors(r.factors()))
}

/// Time derivative of the raw integral behind a balanced factor map, reduced.
pub(crate) fn ddt_raw_factors(f: &FactorMap) -> LinearForm {
    let offset: i64 = -(f.values().map(|&k| k as i64).sum::<i64>());
    let mut out = LinearForm::new();
    // (p^{α+c})_t = (α+c) p^{α+c−1} p₂ / 2
    let mut g = f.clone();
    bump(&mut g, 2, 1);
    let half = ratio(1, 2);
    accumulate(&mut out, &reduce_factors(&g), &AlphaPoly::alpha_plus(offset).scale(&half));
    // (pₙ^k)_t = k pₙ^{k−1} p_{n+2} / 2
    for (&n, &k) in f {
        let mut g = f.clone();
        bump(&mut g, n, -1);
        bump(&mut g, n + 2, 1);
        accumulate(&mut out, &reduce_factors(&g), &AlphaPoly::constant(ratio(k as i64, 2)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(p: &[(u32, u32)]) -> FactorMap {
        p.iter().copied().collect()
    }

    fn sym(p: &[(u32, u32)]) -> MomentSymbol {
        MomentSymbol::from_pairs(p).unwrap()
    }

    #[test]
    fn p1_squared_p2() {
        let r = reduce_factors(&fm(&[(1, 2), (2, 1)]));
        assert_eq!(r.len(), 1);
        assert_eq!(r[&sym(&[(1, 4)])], AlphaPoly::from_ints_over(&[3, -1], 3));
    }

    #[test]
    fn exact_differential_vanishes() {
        assert!(reduce_factors(&fm(&[(1, 1)])).is_empty());
    }

    #[test]
    fn p1_p3() {
        let r = reduce_factors(&fm(&[(1, 1), (3, 1)]));
        assert_eq!(r[&sym(&[(1, 4)])], AlphaPoly::from_roots(&[2, 3]).scale(&ratio(1, 3)));
        assert_eq!(r[&sym(&[(2, 2)])], AlphaPoly::from_int(-1));
    }
}
