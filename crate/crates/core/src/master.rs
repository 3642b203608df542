//! First-stage problem: line energization under the risk budget, with one
//! recourse block and one cost cut per scenario.

use firegrid_lp::{solve_milp, LinearProgram, MilpOptions, MilpStatus, MixedIntegerProgram, Relation, Sense};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::case::{NetworkCase, RiskIntakeMode};
use crate::dispatch::{add_hour_block, solve_recourse, Dispatch, HourBlock, LineState};
use crate::error::SolveError;
use crate::realization::UncertaintyRealization;

/// Line plan with its nominal dispatch and bound information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStageSolution {
    /// `[hour][line]` energization.
    pub line_status: Vec<Vec<bool>>,
    /// Recourse under the nominal realization with these lines.
    pub dispatch: Dispatch,
    /// `[hour][line]` risk scores carried by energized lines.
    pub scores: Vec<Vec<f64>>,
    /// Master surrogate `e`, the worst cost over the scenarios seen so far.
    pub surrogate: f64,
    /// Proven lower bound on the robust optimum.
    pub lower_bound: f64,
}

impl FirstStageSolution {
    pub fn from_lines(
        case: &NetworkCase,
        line_status: Vec<Vec<bool>>,
        surrogate: f64,
        lower_bound: f64,
    ) -> Result<Self, SolveError> {
        let dispatch = solve_recourse(case, &line_status, &UncertaintyRealization::nominal(case))?;
        let scores = line_status
            .iter()
            .enumerate()
            .map(|(t, row)| {
                row.iter()
                    .enumerate()
                    .map(|(l, &on)| if on { case.fire_scores.get(l, t) } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(FirstStageSolution {
            line_status,
            dispatch,
            scores,
            surrogate,
            lower_bound,
        })
    }

    /// Sum of scores that the active intake mode limits: the largest hourly
    /// sum (conservative) or the horizon total (cumulative).
    pub fn risk_aggregate(&self, mode: RiskIntakeMode) -> f64 {
        let hourly = self.scores.iter().map(|r| r.iter().sum::<f64>());
        match mode {
            RiskIntakeMode::Conservative => hourly.fold(0.0, f64::max),
            RiskIntakeMode::Cumulative => hourly.sum(),
        }
    }
}

/// Result of one master solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterOutcome {
    pub line_status: Vec<Vec<bool>>,
    pub surrogate: f64,
    pub bound: f64,
    pub nodes: usize,
}

/// Monolithic master program.
#[derive(Debug, Clone)]
pub struct Master {
    case: NetworkCase,
    pub mip: MixedIntegerProgram,
    pub scenarios: Vec<UncertaintyRealization>,
    /// `[hour][line]` energization binaries.
    pub line_vars: Vec<Vec<usize>>,
    /// `[hour][line]` score variables, present where the score is positive.
    pub score_vars: Vec<Vec<Option<usize>>>,
    pub surrogate_var: usize,
    /// Recourse blocks `[scenario][hour]`.
    pub blocks: Vec<Vec<HourBlock>>,
    pub cut_rows: Vec<usize>,
    pub risk_rows: Vec<usize>,
    keys: HashSet<Vec<bool>>,
}

/// Builds the master over the given scenarios (the nominal one first).
pub fn build_master(case: &NetworkCase, scenarios: &[UncertaintyRealization]) -> Result<Master, SolveError> {
    if scenarios.is_empty() {
        return Err(SolveError::NoScenarios);
    }
    let t_n = case.horizon;
    let mut lp = LinearProgram::new(Sense::Min);
    let surrogate_var = lp.add_named_var("e", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let mut binaries = Vec::new();
    let mut line_vars = Vec::with_capacity(t_n);
    for t in 0..t_n {
        let row: Vec<usize> = case
            .lines
            .iter()
            .map(|line| lp.add_named_var(format!("I_{}_{}", line.label, t + 1), 0.0, 1.0, 0.0))
            .collect();
        binaries.extend(&row);
        line_vars.push(row);
    }
    let mut score_vars = Vec::with_capacity(t_n);
    for t in 0..t_n {
        let row: Vec<Option<usize>> = (0..case.lines.len())
            .map(|l| {
                let psi = case.fire_scores.get(l, t);
                (psi > 0.0).then(|| {
                    let sc = lp.add_named_var(format!("SC_{}_{}", case.lines[l].label, t + 1), 0.0, f64::INFINITY, 0.0);
                    lp.add_row(vec![(sc, 1.0), (line_vars[t][l], -psi)], Relation::Ge, 0.0);
                    sc
                })
            })
            .collect();
        score_vars.push(row);
    }
    let eps = case.params.risk_tolerance;
    let mut risk_rows = Vec::new();
    match case.params.risk_intake_mode {
        RiskIntakeMode::Conservative => {
            for row in &score_vars {
                let c: Vec<(usize, f64)> = row.iter().flatten().map(|&j| (j, 1.0)).collect();
                if !c.is_empty() {
                    risk_rows.push(lp.add_row(c, Relation::Le, eps));
                }
            }
        }
        RiskIntakeMode::Cumulative => {
            let c: Vec<(usize, f64)> = score_vars.iter().flatten().flatten().map(|&j| (j, 1.0)).collect();
            if !c.is_empty() {
                risk_rows.push(lp.add_row(c, Relation::Le, eps));
            }
        }
    }
    let mut master = Master {
        case: case.clone(),
        mip: MixedIntegerProgram::new(lp, binaries),
        scenarios: Vec::new(),
        line_vars,
        score_vars,
        surrogate_var,
        blocks: Vec::new(),
        cut_rows: Vec::new(),
        risk_rows,
        keys: HashSet::new(),
    };
    for s in scenarios {
        master.append_scenario(s)?;
    }
    Ok(master)
}

impl Master {
    pub fn case(&self) -> &NetworkCase {
        &self.case
    }

    pub fn contains(&self, realization: &UncertaintyRealization) -> bool {
        self.keys.contains(&realization.key())
    }

    /// Adds one recourse block and its cost cut `e ≥ cost(y)`.
    pub fn append_scenario(&mut self, realization: &UncertaintyRealization) -> Result<(), SolveError> {
        if let Some(pos) = self.scenarios.iter().position(|s| s.key() == realization.key()) {
            return Err(SolveError::DuplicateScenario(pos));
        }
        realization
            .check(&self.case)
            .map_err(|m| SolveError::PlanShape(format!("realization: {m}")))?;
        let lp = &mut self.mip.lp;
        let mut cut = vec![(self.surrogate_var, 1.0)];
        let mut constant = 0.0;
        let mut blocks = Vec::with_capacity(self.case.horizon);
        for t in 0..self.case.horizon {
            let b = add_hour_block(
                lp,
                &self.case,
                t,
                LineState::Switched(&self.line_vars[t]),
                &realization.demand[t],
                &realization.solar[t],
            );
            cut.extend(b.cost.iter().map(|&(j, c)| (j, -c)));
            constant += b.constant;
            blocks.push(b);
        }
        self.cut_rows.push(lp.add_row(cut, Relation::Ge, constant));
        self.blocks.push(blocks);
        self.keys.insert(realization.key());
        self.scenarios.push(realization.clone());
        Ok(())
    }

    /// Solves the master to relative gap `gap`.
    pub fn solve(&self, gap: f64) -> Result<MasterOutcome, SolveError> {
        let opts = MilpOptions {
            gap,
            abs_gap: 1e-9,
            ..Default::default()
        };
        let sol = solve_milp(&self.mip, &opts)?;
        match sol.status {
            MilpStatus::Optimal => {}
            MilpStatus::Infeasible => {
                let names = self.risk_rows.iter().map(|&r| self.mip.lp.row_name(r)).collect();
                return Err(SolveError::MasterInfeasible(names));
            }
            other => return Err(SolveError::Internal(format!("master search ended with {other:?}"))),
        }
        let line_status = self
            .line_vars
            .iter()
            .map(|row| row.iter().map(|&j| sol.x[j] > 0.5).collect())
            .collect();
        Ok(MasterOutcome {
            line_status,
            surrogate: sol.x[self.surrogate_var],
            bound: sol.best_bound,
            nodes: sol.nodes,
        })
    }
}

/// Solves the master and re-dispatches the chosen plan at nominal values.
pub fn solve_master(master: &Master) -> Result<FirstStageSolution, SolveError> {
    let gap = master.case.params.convergence_gap / 10.0;
    let out = master.solve(gap)?;
    FirstStageSolution::from_lines(&master.case, out.line_status, out.surrogate, out.bound)
}
