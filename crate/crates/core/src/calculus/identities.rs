//! Reduction and time-derivative identities used when deriving the second,
//! third and fourth derivatives, checked as exact polynomial equalities.

use serde::Serialize;

use super::reduce::{accumulate, ddt_raw_factors, reduce_factors, LinearForm};
use crate::algebra::{AlphaPoly, FactorMap, Rational};

#[derive(Clone, Debug)]
pub enum Lhs {
    /// `coeff · ∫ p^{α−Σk} ∏ pₙ^{kₙ}`; `p_t` and `p_xt` are written as `p₂/2`, `p₃/2`.
    Integral(AlphaPoly, FactorMap),
    /// `d/dt ∫ p^{α−Σk} ∏ pₙ^{kₙ}`.
    TimeDerivative(FactorMap),
}

#[derive(Clone, Debug)]
pub struct Identity {
    pub group: &'static str,
    pub name: &'static str,
    pub lhs: Lhs,
    pub rhs: Vec<(AlphaPoly, FactorMap)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityOutcome {
    pub group: &'static str,
    pub name: &'static str,
    pub holds: bool,
}

impl Identity {
    fn side_lhs(&self) -> LinearForm {
        let mut out = LinearForm::new();
        match &self.lhs {
            Lhs::Integral(c, f) => accumulate(&mut out, &reduce_factors(f), c),
            Lhs::TimeDerivative(f) => accumulate(&mut out, &ddt_raw_factors(f), &AlphaPoly::one()),
        }
        out
    }

    fn side_rhs(&self) -> LinearForm {
        let mut out = LinearForm::new();
        for (c, f) in &self.rhs {
            accumulate(&mut out, &reduce_factors(f), c);
        }
        out
    }

    /// Both sides reduce to the same canonical combination.
    pub fn holds(&self) -> bool {
        self.side_lhs() == self.side_rhs()
    }
}

fn f(pairs: &[(u32, u32)]) -> FactorMap {
    pairs.iter().copied().collect()
}

/// `(num/den) · ∏ (α − r)`.
fn c(roots: &[i64], num: i64, den: i64) -> AlphaPoly {
    AlphaPoly::from_roots(roots).scale(&Rational::new(num.into(), den.into()))
}

/// `(num/den) · α(α−1)` style products with an α factor included.
fn ca(roots: &[i64], num: i64, den: i64) -> AlphaPoly {
    AlphaPoly::alpha() * c(roots, num, den)
}

pub fn catalog() -> Vec<Identity> {
    use Lhs::{Integral as I, TimeDerivative as T};
    let half = || c(&[], 1, 2);
    let one = || c(&[], 1, 1);
    let s2 = "second-order";
    let r3 = "third-order reductions";
    let d3 = "third-order moment derivatives";
    let r4 = "fourth-order reductions";
    let d4 = "fourth-order moment derivatives";
    vec![
        Identity {
            group: s2,
            name: "∫p^(α-3) p_t p1^2",
            lhs: I(half(), f(&[(1, 2), (2, 1)])),
            rhs: vec![(c(&[3], -1, 6), f(&[(1, 4)]))],
        },
        Identity {
            group: s2,
            name: "∫p^(α-2) p1 p_xt",
            lhs: I(half(), f(&[(1, 1), (3, 1)])),
            rhs: vec![(c(&[2, 3], 1, 6), f(&[(1, 4)])), (c(&[], -1, 2), f(&[(2, 2)]))],
        },
        Identity {
            group: s2,
            name: "∫p^(α-2) p1 p_xt, one integration by parts",
            lhs: I(half(), f(&[(1, 1), (3, 1)])),
            rhs: vec![(c(&[2], -1, 2), f(&[(1, 2), (2, 1)])), (c(&[], -1, 2), f(&[(2, 2)]))],
        },
        Identity {
            group: s2,
            name: "∫p^(α-3) p1^2 p2",
            lhs: I(one(), f(&[(1, 2), (2, 1)])),
            rhs: vec![(c(&[3], -1, 3), f(&[(1, 4)]))],
        },
        Identity {
            group: s2,
            name: "d/dt ∫p^(α-2) p1^2",
            lhs: T(f(&[(1, 2)])),
            rhs: vec![(c(&[2, 3], 1, 6), f(&[(1, 4)])), (c(&[], -1, 1), f(&[(2, 2)]))],
        },
        Identity { group: s2, name: "d/dt ∫p^α", lhs: T(f(&[])), rhs: vec![(ca(&[1], -1, 2), f(&[(1, 2)]))] },
        Identity {
            group: r3,
            name: "∫p^(α-5) p1^4 p2",
            lhs: I(one(), f(&[(1, 4), (2, 1)])),
            rhs: vec![(c(&[5], -1, 5), f(&[(1, 6)]))],
        },
        Identity {
            group: r3,
            name: "∫p^(α-4) p1^3 p3",
            lhs: I(one(), f(&[(1, 3), (3, 1)])),
            rhs: vec![(c(&[4, 5], 1, 5), f(&[(1, 6)])), (c(&[], -3, 1), f(&[(1, 2), (2, 2)]))],
        },
        Identity {
            group: r3,
            name: "∫p^(α-3) p1 p2 p3",
            lhs: I(one(), f(&[(1, 1), (2, 1), (3, 1)])),
            rhs: vec![(c(&[3], -1, 2), f(&[(1, 2), (2, 2)])), (c(&[], -1, 2), f(&[(2, 3)]))],
        },
        Identity {
            group: r3,
            name: "∫p^(α-2) p2 p4",
            lhs: I(one(), f(&[(2, 1), (4, 1)])),
            rhs: vec![
                (c(&[2, 3], 1, 2), f(&[(1, 2), (2, 2)])),
                (c(&[2], 1, 2), f(&[(2, 3)])),
                (c(&[], -1, 1), f(&[(3, 2)])),
            ],
        },
        Identity {
            group: r3,
            name: "∫p^(α-3) p1^2 p2",
            lhs: I(one(), f(&[(1, 2), (2, 1)])),
            rhs: vec![(c(&[3], -1, 3), f(&[(1, 4)]))],
        },
        Identity {
            group: r3,
            name: "∫p^(α-2) p1 p3",
            lhs: I(one(), f(&[(1, 1), (3, 1)])),
            rhs: vec![(c(&[2, 3], 1, 3), f(&[(1, 4)])), (c(&[], -1, 1), f(&[(2, 2)]))],
        },
        Identity {
            group: r3,
            name: "∫p^(α-1) p4",
            lhs: I(one(), f(&[(4, 1)])),
            rhs: vec![(c(&[1, 2, 3], -1, 3), f(&[(1, 4)])), (c(&[1], 1, 1), f(&[(2, 2)]))],
        },
        Identity {
            group: r3,
            name: "∫p^(α-3) p1^2 p4",
            lhs: I(one(), f(&[(1, 2), (4, 1)])),
            rhs: vec![
                (c(&[3, 4, 5], -1, 5), f(&[(1, 6)])),
                (c(&[3], 4, 1), f(&[(1, 2), (2, 2)])),
                (c(&[], 1, 1), f(&[(2, 3)])),
            ],
        },
        Identity {
            group: d3,
            name: "d/dt ∫p^(α-4) p1^4",
            lhs: T(f(&[(1, 4)])),
            rhs: vec![(c(&[4, 5], 3, 10), f(&[(1, 6)])), (c(&[], -6, 1), f(&[(1, 2), (2, 2)]))],
        },
        Identity {
            group: d3,
            name: "d/dt ∫p^(α-2) p2^2",
            lhs: T(f(&[(2, 2)])),
            rhs: vec![
                (c(&[2, 3], 1, 2), f(&[(1, 2), (2, 2)])),
                (c(&[2], 1, 1), f(&[(2, 3)])),
                (c(&[], -1, 1), f(&[(3, 2)])),
            ],
        },
        Identity {
            group: r4,
            name: "∫p^(α-7) p2 p1^6",
            lhs: I(one(), f(&[(1, 6), (2, 1)])),
            rhs: vec![(c(&[7], -1, 7), f(&[(1, 8)]))],
        },
        Identity {
            group: r4,
            name: "∫p^(α-6) p1^5 p3",
            lhs: I(one(), f(&[(1, 5), (3, 1)])),
            rhs: vec![(c(&[6, 7], 1, 7), f(&[(1, 8)])), (c(&[], -5, 1), f(&[(1, 4), (2, 2)]))],
        },
        Identity {
            group: r4,
            name: "∫p^(α-5) p1^3 p2 p3",
            lhs: I(one(), f(&[(1, 3), (2, 1), (3, 1)])),
            rhs: vec![(c(&[5], -1, 2), f(&[(1, 4), (2, 2)])), (c(&[], -3, 2), f(&[(1, 2), (2, 3)]))],
        },
        Identity {
            group: r4,
            name: "∫p^(α-4) p1 p2^2 p3",
            lhs: I(one(), f(&[(1, 1), (2, 2), (3, 1)])),
            rhs: vec![(c(&[4], -1, 3), f(&[(1, 2), (2, 3)])), (c(&[], -1, 3), f(&[(2, 4)]))],
        },
        Identity {
            group: r4,
            name: "∫p^(α-4) p1^2 p2 p4",
            lhs: I(one(), f(&[(1, 2), (2, 1), (4, 1)])),
            rhs: vec![
                (c(&[4, 5], 1, 2), f(&[(1, 4), (2, 2)])),
                (c(&[4], 13, 6), f(&[(1, 2), (2, 3)])),
                (c(&[], 2, 3), f(&[(2, 4)])),
                (c(&[], -1, 1), f(&[(1, 2), (3, 2)])),
            ],
        },
        Identity {
            group: r4,
            name: "∫p^(α-3) p2^2 p4",
            lhs: I(one(), f(&[(2, 2), (4, 1)])),
            rhs: vec![
                (c(&[3, 4], 1, 3), f(&[(1, 2), (2, 3)])),
                (c(&[3], 1, 3), f(&[(2, 4)])),
                (c(&[], -2, 1), f(&[(2, 1), (3, 2)])),
            ],
        },
        Identity {
            group: r4,
            name: "∫p^(α-3) p1 p3 p4",
            lhs: I(one(), f(&[(1, 1), (3, 1), (4, 1)])),
            rhs: vec![(c(&[3], -1, 2), f(&[(1, 2), (3, 2)])), (c(&[], -1, 2), f(&[(2, 1), (3, 2)]))],
        },
        Identity {
            group: r4,
            name: "∫p^(α-2) p3 p5",
            lhs: I(one(), f(&[(3, 1), (5, 1)])),
            rhs: vec![
                (c(&[2, 3], 1, 2), f(&[(1, 2), (3, 2)])),
                (c(&[2], 1, 2), f(&[(2, 1), (3, 2)])),
                (c(&[], -1, 1), f(&[(4, 2)])),
            ],
        },
        Identity {
            group: r4,
            name: "∫p^(α-5) p1^4 p4",
            lhs: I(one(), f(&[(1, 4), (4, 1)])),
            rhs: vec![
                (c(&[5, 6, 7], -1, 7), f(&[(1, 8)])),
                (c(&[5], 7, 1), f(&[(1, 4), (2, 2)])),
                (c(&[], 6, 1), f(&[(1, 2), (2, 3)])),
            ],
        },
        Identity {
            group: d4,
            name: "d/dt ∫p^(α-6) p1^6",
            lhs: T(f(&[(1, 6)])),
            rhs: vec![(c(&[6, 7], 5, 14), f(&[(1, 8)])), (c(&[], -15, 1), f(&[(1, 4), (2, 2)]))],
        },
        Identity {
            group: d4,
            name: "d/dt ∫p^(α-4) p1^2 p2^2",
            lhs: T(f(&[(1, 2), (2, 2)])),
            rhs: vec![
                (c(&[4], 7, 3), f(&[(1, 2), (2, 3)])),
                (c(&[], 1, 3), f(&[(2, 4)])),
                (c(&[], -1, 1), f(&[(1, 2), (3, 2)])),
                (c(&[4, 5], 1, 2), f(&[(1, 4), (2, 2)])),
            ],
        },
        Identity {
            group: d4,
            name: "d/dt ∫p^(α-3) p2^3",
            lhs: T(f(&[(2, 3)])),
            rhs: vec![
                (c(&[3, 4], 1, 2), f(&[(1, 2), (2, 3)])),
                (c(&[3], 1, 1), f(&[(2, 4)])),
                (c(&[], -3, 1), f(&[(2, 1), (3, 2)])),
            ],
        },
        Identity {
            group: d4,
            name: "d/dt ∫p^(α-2) p3^2",
            lhs: T(f(&[(3, 2)])),
            rhs: vec![
                (c(&[2, 3], 1, 2), f(&[(1, 2), (3, 2)])),
                (c(&[2], 1, 1), f(&[(2, 1), (3, 2)])),
                (c(&[], -1, 1), f(&[(4, 2)])),
            ],
        },
    ]
}

pub fn verify_all() -> Vec<IdentityOutcome> {
    catalog().iter().map(|id| IdentityOutcome { group: id.group, name: id.name, holds: id.holds() }).collect()
}
