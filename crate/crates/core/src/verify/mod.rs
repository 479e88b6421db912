//! Exact positivity certificates for polynomial Gram matrices.
//!
//! Everything here is rational arithmetic.

mod certificate;
mod matrix;
mod sturm;

pub use certificate::{certify_interval, certify_point, PolyEvidence, PositivityCertificate, Verdict};
pub use matrix::{
    assemble_matrix, determinant, determinant_rational, principal_minors, psd_by_zero_pattern, PolyMatrix,
};
pub use sturm::{
    count_roots_open, isolate_roots, real_root_count, refine_root, sign_at, square_free_part, sturm_root_count,
    RootBracket, SturmChain,
};
