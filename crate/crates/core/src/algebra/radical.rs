//! Exact arithmetic with nested square roots over polynomials in α.
//!
//! Generator `gᵢ` satisfies `gᵢ² = sᵢ`, where `sᵢ` only involves earlier generators.
//! Elements are kept in the basis of square-free products of generators, so a zero
//! representation is a proof of zero. The converse can fail when generators are
//! dependent, which only ever makes an identity check report a mismatch.

use std::collections::BTreeMap;

use super::poly::AlphaPoly;
use super::rational::Rational;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadicalElem {
    terms: BTreeMap<u32, AlphaPoly>,
}

impl RadicalElem {
    pub fn zero() -> Self {
        RadicalElem::default()
    }

    pub fn poly(p: AlphaPoly) -> Self {
        let mut e = RadicalElem::zero();
        e.push(0, p);
        e
    }

    pub fn int(c: i64) -> Self {
        Self::poly(AlphaPoly::from_int(c))
    }

    fn push(&mut self, mask: u32, p: AlphaPoly) {
        if p.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&mask) {
            Some(q) => &q + &p,
            None => p,
        };
        if !sum.is_zero() {
            self.terms.insert(mask, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, p) in &o.terms {
            out.push(*m, p.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale_poly(&AlphaPoly::from_int(-1)))
    }

    pub fn scale_poly(&self, p: &AlphaPoly) -> Self {
        let mut out = RadicalElem::zero();
        for (m, q) in &self.terms {
            out.push(*m, q * p);
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        self.scale_poly(&AlphaPoly::constant(r.clone()))
    }
}

/// The tower of adjoined square roots.
#[derive(Clone, Debug, Default)]
pub struct RadicalTower {
    squares: Vec<RadicalElem>,
}

impl RadicalTower {
    pub fn new() -> Self {
        RadicalTower::default()
    }

    /// Adjoin `√square` and return it as an element.
    pub fn adjoin(&mut self, square: RadicalElem) -> RadicalElem {
        let i = self.squares.len();
        assert!(i < 32, "at most 32 generators");
        assert!(square.terms.keys().all(|m| *m >> i == 0), "a square may only involve earlier generators");
        self.squares.push(square);
        let mut e = RadicalElem::zero();
        e.push(1 << i, AlphaPoly::one());
        e
    }

    pub fn mul(&self, a: &RadicalElem, b: &RadicalElem) -> RadicalElem {
        let mut out = RadicalElem::zero();
        for (ma, pa) in &a.terms {
            for (mb, pb) in &b.terms {
                let mut t = RadicalElem::zero();
                t.push(ma ^ mb, pa * pb);
                let common = ma & mb;
                for i in (0..self.squares.len()).rev() {
                    if common >> i & 1 == 1 {
                        t = self.mul(&t, &self.squares[i]);
                    }
                }
                out = out.add(&t);
            }
        }
        out
    }

    pub fn square(&self, a: &RadicalElem) -> RadicalElem {
        self.mul(a, a)
    }

    /// Numeric value with every generator taken as the nonnegative root.
    pub fn eval_f64(&self, e: &RadicalElem, alpha: f64) -> f64 {
        let gens: Vec<f64> = {
            let mut g = Vec::with_capacity(self.squares.len());
            for s in &self.squares {
                let v = eval_with(s, &g, alpha);
                g.push(v.max(0.0).sqrt());
            }
            g
        };
        eval_with(e, &gens, alpha)
    }
}

fn eval_with(e: &RadicalElem, gens: &[f64], alpha: f64) -> f64 {
    e.terms
        .iter()
        .map(|(m, p)| {
            let mut v = p.eval_f64(alpha);
            for (i, g) in gens.iter().enumerate() {
                if m >> i & 1 == 1 {
                    v *= g;
                }
            }
            v
        })
        .sum()
}
