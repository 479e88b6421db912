use std::cmp::Ordering;

use num_traits::Zero;

use crate::algebra::{rational_to_string, AlphaPoly, Rational};
use crate::error::{Error, Result};

/// `p / gcd(p, p′)`, made primitive.
pub fn square_free_part(p: &AlphaPoly) -> AlphaPoly {
    if p.degree().unwrap_or(0) == 0 {
        return p.primitive();
    }
    let g = p.gcd(&p.derivative());
    p.div_exact(&g).expect("gcd divides").primitive()
}

fn sign(x: &Rational) -> i8 {
    match x.cmp(&Rational::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

pub fn sign_at(p: &AlphaPoly, x: &Rational) -> i8 {
    sign(&p.eval(x))
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for s in signs.filter(|s| *s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Sturm chain of the square-free part of a polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<AlphaPoly>,
}

impl SturmChain {
    pub fn new(p: &AlphaPoly) -> Self {
        assert!(!p.is_zero(), "Sturm chain of the zero polynomial");
        let p0 = square_free_part(p);
        let mut chain = vec![p0.clone()];
        let p1 = p0.derivative().primitive();
        if !p1.is_zero() {
            chain.push(p1);
            loop {
                let n = chain.len();
                let r = chain[n - 2].div_rem(&chain[n - 1]).1;
                if r.is_zero() {
                    break;
                }
                // positive rescaling keeps the chain valid
                chain.push(r.primitive().scale(&Rational::from_integer((-1).into())));
            }
        }
        SturmChain { chain }
    }

    pub fn base(&self) -> &AlphaPoly {
        &self.chain[0]
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn variations_at(&self, x: &Rational) -> usize {
        variations(self.chain.iter().map(|q| sign_at(q, x)))
    }

    fn variations_at_infinity(&self, positive: bool) -> usize {
        variations(self.chain.iter().map(|q| {
            let l = sign(q.leading().expect("nonzero"));
            let odd = q.degree().unwrap_or(0) % 2 == 1;
            if positive || !odd {
                l
            } else {
                -l
            }
        }))
    }

    /// Distinct roots in the open interval; endpoints may be roots.
    pub fn count_open(&self, lo: &Rational, hi: &Rational) -> usize {
        if lo >= hi {
            return 0;
        }
        // with a square-free base, V(a) − V(b) counts roots in (a, b]
        let v = self.variations_at(lo) - self.variations_at(hi);
        v - usize::from(sign_at(self.base(), hi) == 0)
    }

    pub fn count_real(&self) -> usize {
        self.variations_at_infinity(false) - self.variations_at_infinity(true)
    }
}

/// Distinct real roots of `p` in `(lo, hi)`.
///
/// Endpoint roots are rejected; see [`count_roots_open`] for the variant that allows them.
pub fn sturm_root_count(p: &AlphaPoly, interval: (&Rational, &Rational)) -> Result<usize> {
    let (lo, hi) = interval;
    if p.is_zero() {
        return Err(Error::invalid("root count of the zero polynomial"));
    }
    if lo >= hi {
        return Err(Error::invalid("empty interval"));
    }
    for e in [lo, hi] {
        if sign_at(p, e) == 0 {
            return Err(Error::EndpointRoot { at: rational_to_string(e) });
        }
    }
    Ok(SturmChain::new(p).count_open(lo, hi))
}

/// Distinct roots in `(lo, hi)`, counted exactly even when an endpoint is a root.
pub fn count_roots_open(p: &AlphaPoly, lo: &Rational, hi: &Rational) -> usize {
    SturmChain::new(p).count_open(lo, hi)
}

/// Number of distinct real roots.
pub fn real_root_count(p: &AlphaPoly) -> usize {
    SturmChain::new(p).count_real()
}

/// A rational interval holding exactly one root; `lo == hi` when the root is rational
/// and was hit exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootBracket {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootBracket {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

/// Isolate every root in `(lo, hi)` by bisection down to brackets no wider than `width`.
pub fn isolate_roots(p: &AlphaPoly, lo: &Rational, hi: &Rational, width: &Rational) -> Vec<RootBracket> {
    let chain = SturmChain::new(p);
    let mut out = Vec::new();
    let two = Rational::from_integer(2.into());
    let mut stack = vec![(lo.clone(), hi.clone())];
    while let Some((a, b)) = stack.pop() {
        let n = chain.count_open(&a, &b);
        if n == 0 {
            continue;
        }
        if n == 1 && &b - &a <= *width {
            out.push(RootBracket { lo: a, hi: b });
            continue;
        }
        let m = (&a + &b) / &two;
        if sign_at(chain.base(), &m) == 0 {
            out.push(RootBracket { lo: m.clone(), hi: m.clone() });
        }
        stack.push((m.clone(), b));
        stack.push((a, m));
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out
}

/// Shrink a bracket holding a single root to width at most `width`.
pub fn refine_root(p: &AlphaPoly, bracket: &RootBracket, width: &Rational) -> RootBracket {
    isolate_roots(p, &bracket.lo, &bracket.hi, width).into_iter().next().unwrap_or_else(|| bracket.clone())
}
