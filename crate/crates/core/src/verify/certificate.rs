use num_traits::Zero;
use serde_json::{json, Value};

use super::matrix::{principal_minors, psd_by_zero_pattern, rat_str, PolyMatrix};
use super::sturm::{count_roots_open, isolate_roots, sign_at, RootBracket};
use crate::algebra::{AlphaPoly, PolyJson, Rational};

/// Root count and midpoint sign of one polynomial over the certificate interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyEvidence {
    pub poly: AlphaPoly,
    pub roots_in_interval: usize,
    pub midpoint_sign: i8,
}

impl PolyEvidence {
    fn new(poly: &AlphaPoly, lo: &Rational, hi: &Rational) -> Self {
        let mid = (lo + hi) / Rational::from_integer(2.into());
        let (roots, s) = if poly.is_zero() {
            (0, 0)
        } else if lo == hi {
            (0, sign_at(poly, lo))
        } else {
            (count_roots_open(poly, lo, hi), sign_at(poly, &mid))
        };
        PolyEvidence { poly: poly.clone(), roots_in_interval: roots, midpoint_sign: s }
    }

    /// Strictly positive throughout.
    pub fn positive(&self) -> bool {
        self.roots_in_interval == 0 && self.midpoint_sign > 0
    }

    /// Nonnegative throughout; the zero polynomial qualifies.
    pub fn nonnegative(&self) -> bool {
        self.poly.is_zero() || self.positive()
    }

    fn to_json(&self) -> Value {
        json!({
            "poly": PolyJson::from(&self.poly),
            "roots_in_interval": self.roots_in_interval,
            "midpoint_sign": self.midpoint_sign,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    PositiveDefinite,
    /// Only at a single point: the nonzero block is positive definite and the
    /// listed rows and columns vanish exactly.
    PositiveSemidefiniteAtEndpoint {
        zero_rows: Vec<usize>,
    },
    Failed {
        widest: Option<(Rational, Rational)>,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::PositiveDefinite => "positive-definite",
            Verdict::PositiveSemidefiniteAtEndpoint { .. } => "positive-semidefinite-at-endpoint",
            Verdict::Failed { .. } => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositivityCertificate {
    pub interval: (Rational, Rational),
    pub minors: Vec<PolyEvidence>,
    pub slacks: Vec<PolyEvidence>,
    pub verdict: Verdict,
}

impl PositivityCertificate {
    pub fn is_certified(&self) -> bool {
        !matches!(self.verdict, Verdict::Failed { .. })
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "interval": [rat_str(&self.interval.0), rat_str(&self.interval.1)],
            "minors": self.minors.iter().map(PolyEvidence::to_json).collect::<Vec<_>>(),
            "slacks": self.slacks.iter().map(PolyEvidence::to_json).collect::<Vec<_>>(),
            "verdict": self.verdict.label(),
        });
        match &self.verdict {
            Verdict::Failed { widest } => {
                v["widest_certified"] = match widest {
                    Some((a, b)) => json!([rat_str(a), rat_str(b)]),
                    None => Value::Null,
                };
            }
            Verdict::PositiveSemidefiniteAtEndpoint { zero_rows } => {
                v["zero_rows"] = json!(zero_rows.iter().map(|i| i + 1).collect::<Vec<_>>());
            }
            Verdict::PositiveDefinite => {}
        }
        v
    }
}

fn all_certified(minors: &[PolyEvidence], slacks: &[PolyEvidence]) -> bool {
    minors.iter().all(PolyEvidence::positive) && slacks.iter().all(PolyEvidence::nonnegative)
}

/// Certify that `m` is positive definite and every slack is nonnegative on the open interval.
///
/// A degenerate interval `(a, a)` checks the single point `a` instead, where a
/// zero row pattern may downgrade the verdict to semidefinite.
pub fn certify_interval(
    m: &PolyMatrix,
    slacks: &[AlphaPoly],
    interval: (&Rational, &Rational),
) -> PositivityCertificate {
    let (lo, hi) = interval;
    if lo == hi {
        return certify_point(m, slacks, lo);
    }
    let minor_polys = principal_minors(m);
    let minors: Vec<PolyEvidence> = minor_polys.iter().map(|p| PolyEvidence::new(p, lo, hi)).collect();
    let slack_ev: Vec<PolyEvidence> = slacks.iter().map(|p| PolyEvidence::new(p, lo, hi)).collect();
    let verdict = if all_certified(&minors, &slack_ev) {
        Verdict::PositiveDefinite
    } else {
        Verdict::Failed { widest: widest_certified(&minor_polys, slacks, lo, hi) }
    };
    PositivityCertificate { interval: (lo.clone(), hi.clone()), minors, slacks: slack_ev, verdict }
}

/// Exact check at one α.
pub fn certify_point(m: &PolyMatrix, slacks: &[AlphaPoly], at: &Rational) -> PositivityCertificate {
    let minors: Vec<PolyEvidence> = principal_minors(m).iter().map(|p| PolyEvidence::new(p, at, at)).collect();
    let slack_ev: Vec<PolyEvidence> = slacks.iter().map(|p| PolyEvidence::new(p, at, at)).collect();
    let slacks_ok = slack_ev.iter().all(|e| e.midpoint_sign >= 0);
    let verdict = if slacks_ok && minors.iter().all(|e| e.midpoint_sign > 0) {
        Verdict::PositiveDefinite
    } else {
        let (psd, zero_rows) = psd_by_zero_pattern(&m.eval(at));
        if slacks_ok && psd {
            Verdict::PositiveSemidefiniteAtEndpoint { zero_rows }
        } else {
            Verdict::Failed { widest: None }
        }
    };
    PositivityCertificate { interval: (at.clone(), at.clone()), minors, slacks: slack_ev, verdict }
}

/// Widest open subinterval of `(lo, hi)` between consecutive roots on which every check passes.
fn widest_certified(
    minors: &[AlphaPoly],
    slacks: &[AlphaPoly],
    lo: &Rational,
    hi: &Rational,
) -> Option<(Rational, Rational)> {
    if minors.iter().any(AlphaPoly::is_zero) {
        return None;
    }
    let width = (hi - lo) / Rational::from_integer((1i64 << 20).into());
    let mut brackets: Vec<RootBracket> = minors
        .iter()
        .chain(slacks.iter().filter(|p| !p.is_zero()))
        .flat_map(|p| isolate_roots(p, lo, hi, &width))
        .collect();
    brackets.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut cuts: Vec<(Rational, Rational)> = Vec::new();
    for b in brackets {
        match cuts.last_mut() {
            Some(last) if b.lo <= last.1 => {
                if b.hi > last.1 {
                    last.1 = b.hi;
                }
            }
            _ => cuts.push((b.lo, b.hi)),
        }
    }
    let mut edges = vec![lo.clone()];
    for (a, b) in cuts {
        edges.push(a);
        edges.push(b);
    }
    edges.push(hi.clone());
    let mut best: Option<(Rational, Rational)> = None;
    for pair in edges.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a >= b {
            continue;
        }
        let ms: Vec<PolyEvidence> = minors.iter().map(|p| PolyEvidence::new(p, a, b)).collect();
        let ss: Vec<PolyEvidence> = slacks.iter().map(|p| PolyEvidence::new(p, a, b)).collect();
        if !all_certified(&ms, &ss) {
            continue;
        }
        let wider = match &best {
            Some((x, y)) => b - a > y - x,
            None => true,
        };
        if wider {
            best = Some((a.clone(), b.clone()));
        }
    }
    best.filter(|(a, b)| !(b - a).is_zero())
}
