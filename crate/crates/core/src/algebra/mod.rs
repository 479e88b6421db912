//! Exact arithmetic substrate: rationals, polynomials in α and moment expressions.

mod json;
mod moment;
mod poly;
mod radical;
mod rational;

pub use json::{ExprJson, PolyJson};
pub use moment::{is_canonical, FactorMap, MomentExpr, MomentSymbol, MomentTerm, Monomial, RawIntegral};
pub use poly::AlphaPoly;
pub use radical::{RadicalElem, RadicalTower};
pub(crate) use rational::lcm_of_denominators;
pub use rational::{parse_rational, rat, rat_from_f64_rounded, rat_to_f64, rational_to_string, Rational};
