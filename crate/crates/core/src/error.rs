use firegrid_lp::LpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {entity}: {message}")]
    Invalid { entity: String, message: String },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error("solver: {0}")]
    Lp(#[from] LpError),
    #[error("master needs at least one scenario")]
    NoScenarios,
    #[error("scenario {0} is already in the master")]
    DuplicateScenario(usize),
    #[error("master problem is infeasible; binding rows: {0:?}")]
    MasterInfeasible(Vec<String>),
    #[error("first-stage plan does not match the case: {0}")]
    PlanShape(String),
    #[error("{count} uncertainty indicators exceed the enumeration bound of {limit}")]
    EnumerationBound { count: usize, limit: usize },
    #[error("{0} patterns exceed the enumeration bound")]
    TooManyPatterns(usize),
    #[error("internal error: {0}")]
    Internal(String),
}
