//! Linear and mixed-binary programming kernels.
//!
//! [`solve_lp`] runs a bounded-variable revised simplex (primal with a
//! composite phase 1, dual simplex for warm restarts) over a sparse LU
//! factorization of the basis. [`milp::solve_milp`] layers a deterministic
//! branch-and-bound on top for problems whose integer variables are binary.

mod lu;
pub mod milp;
mod model;
mod scaling;
mod simplex;
pub mod text;

pub use milp::{
    solve_milp, solve_milp_linked, MilpOptions, MilpSolution, MilpStatus, MixedIntegerProgram,
};
pub use model::{
    extract_duals, LinearProgram, LpError, LpSolution, LpStatus, Relation, Row, Sense,
};
pub use simplex::{solve_lp, solve_lp_with, Basis, SimplexOptions};

/// Feasibility tolerance applied to scaled rows and bounds.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost tolerance for optimality.
pub const OPT_TOL: f64 = 1e-7;
/// Smallest acceptable pivot magnitude.
pub const PIVOT_TOL: f64 = 1e-9;
