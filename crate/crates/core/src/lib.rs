//! Hourly line energization and dispatch under wildfire ignition risk,
//! solved as a two-stage robust program by column-and-constraint generation.

pub mod artifacts;
pub mod case;
pub mod cases;
pub mod ccg;
pub mod dispatch;
mod error;
pub mod io;
pub mod master;
pub mod patterns;
pub mod realization;
pub mod risk;
pub mod subproblem;
pub mod sweep;

pub use case::{
    segmentize_quadratic, Bus, DemandPoint, FireScores, Generator, Line, NetworkCase, RiskIntakeMode, RobustParams,
    Segment, SolarUnit,
};
pub use cases::{build_6bus_case, generate_synthetic_scores, ScoreConfig};
pub use ccg::{brute_force_worst_case, robust_objective, run_ccg, run_ccg_with, CcgResult, CcgStatus, CcgTrace, MasterStrategy};
pub use error::{CaseError, SolveError};
pub use io::{load_case, save_case};
pub use master::{build_master, solve_master, FirstStageSolution, Master};
pub use realization::UncertaintyRealization;
pub use subproblem::{build_dual_subproblem, solve_subproblem, worst_case, DualSolution, DualSubproblem};
pub use risk::{compare_solar_siting, quantify_line_risk, RiskReport};
pub use sweep::{run_sweep, SweepAxis, SweepSpec};
