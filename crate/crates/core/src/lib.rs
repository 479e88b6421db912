//! Derivatives of Rényi, Tsallis and Shannon entropy along the heat flow
//! `p_t = ½ p_xx`.
//!
//! The crate is split the same way the computation flows:
//!
//! * [`algebra`]: exact rationals, polynomials in α and moment expressions;
//! * [`calculus`]: integration-by-parts rewriting and time derivatives;
//! * [`sos`]: Gram-matrix matching problems and a small SDP solver;
//! * [`verify`]: exact principal minors and Sturm root counting;
//! * [`numeric`]: Gaussian mixtures, quadrature, entropies and sign scans.

pub mod algebra;
pub mod calculus;
pub mod catalog;
pub mod error;
pub mod numeric;
pub mod sos;
pub mod verify;

pub use algebra::{AlphaPoly, MomentExpr, MomentSymbol, MomentTerm, Rational, RawIntegral};
pub use calculus::{DerivativeResult, EntropyKind};
pub use error::{Error, Result};
