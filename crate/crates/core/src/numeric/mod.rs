//! Gaussian mixtures under the heat flow: quadrature, entropies, time derivatives,
//! sign scans and entropy bounds.

mod bounds;
mod dd;
mod derivative;
mod mixture;
mod moments;
mod quadrature;
mod scan;

pub use bounds::{
    entropy_bounds, entropy_power_curvature, entropy_power_second_difference, shannon_variance_bound,
    tsallis2_identity_check, EntropyBounds,
};
pub use dd::Dd;
pub use derivative::{
    derivative_eval, derivative_with_error, engine_derivatives, expr_eval, spectral_derivatives, DerivativeValue,
    Route, MAX_SPECTRAL_ORDER, SPECTRAL_DEGREE,
};
pub use mixture::{density_derivative, MixtureDensity};
pub use moments::{entropy_eval, moment_eval, moments_eval, power_integral, EvalPoint, MomentBatch, SHANNON_BAND};
pub use quadrature::{integrate, integrate_vec, QuadResult, QuadratureConfig};
pub use scan::{
    scan_signs, scan_signs_with, t_grid, CrossCheck, ProgressFn, ScanCell, ScanOptions, SignScanReport, SignSeries,
    Violation,
};
