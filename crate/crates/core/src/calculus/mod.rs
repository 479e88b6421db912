//! Integration-by-parts rewriting and time derivatives along `p_t = ½ p₂`.

mod derive;
pub mod identities;
mod reduce;

pub use derive::{
    ddt_expr, ddt_moment, ddt_moment_raw, entropy_derivative, entropy_derivative_with_cap, power_concavity_expr,
    DerivativeResult, EntropyKind, DEFAULT_MAX_ORDER,
};
pub use reduce::{reduce_factors, reduce_raw_integral, LinearForm};
