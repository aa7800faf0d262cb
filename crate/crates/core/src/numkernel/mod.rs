//! Self-contained dense numerics.

pub mod lp;
pub mod matrix;
pub mod minimize;
pub mod special;

pub use lp::{lp_solve, LpOutcome, LpProblem};
pub use matrix::{matrix_geometric_mean, sqrt_pd, Cholesky, SymEigen, SymMatrix};
pub use special::{ball_volume, frac_binom, ln_ball_volume, ln_frac_binom, log_gamma};
