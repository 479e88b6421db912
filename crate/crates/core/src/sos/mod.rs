//! Gram-matrix matching problems, a dense SDP feasibility solver and curve fitting.

mod basis;
mod fit;
mod problem;
mod sdp;

pub use basis::{default_gram_basis, default_slacks, parse_slack_spec, GramBasisElement};
pub use fit::{fit_samples, fit_table, sample_and_fit, FittedParams};
pub use problem::{
    build_for_target, build_for_target_at, build_gram_problem, entry_name, Affine, Constraint, GramProblem,
    Parametrization, SlackTerm,
};
pub use sdp::{solve_feasibility, solve_feasibility_with, Feasibility, FeasiblePoint, SolverOptions};
