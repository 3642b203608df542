//! Column-and-constraint generation driver and the enumeration oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::case::NetworkCase;
use crate::dispatch::{solve_recourse, Dispatch};
use crate::error::SolveError;
use crate::master::{build_master, FirstStageSolution, Master, MasterOutcome};
use crate::patterns::{PatternMaster, MAX_PATTERN_LINES};
use crate::realization::UncertaintyRealization;
use crate::subproblem::worst_case;

/// Largest number of uncertainty indicators the oracle will enumerate.
pub const ENUMERATION_LIMIT: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MasterStrategy {
    /// One big-M program with a recourse copy per scenario.
    Monolithic,
    /// Per-hour pattern enumeration (exact; needs few lines).
    HourPatterns,
    /// Patterns when the line count allows, otherwise monolithic.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcgStatus {
    Converged,
    IterationLimit,
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub gap: f64,
    /// Worst-case cost of this iteration's plan.
    pub worst_cost: f64,
    pub realization: UncertaintyRealization,
    pub line_status: Vec<Vec<bool>>,
    pub master_nodes: usize,
    /// Wall-clock seconds; not part of the deterministic artifacts.
    #[serde(skip)]
    pub master_seconds: f64,
    #[serde(skip)]
    pub subproblem_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcgTrace {
    pub iterations: Vec<IterationRecord>,
    pub status: CcgStatus,
}

#[derive(Debug, Clone)]
pub struct CcgResult {
    /// The plan with the smallest worst-case cost found.
    pub plan: FirstStageSolution,
    pub trace: CcgTrace,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Worst realization of the returned plan and its dispatch.
    pub worst_case: UncertaintyRealization,
    pub worst_dispatch: Dispatch,
}

impl CcgResult {
    /// Robust cost of the returned plan.
    pub fn objective(&self) -> f64 {
        self.upper_bound
    }

    pub fn gap(&self) -> f64 {
        relative_gap(self.lower_bound, self.upper_bound)
    }
}

fn relative_gap(lb: f64, ub: f64) -> f64 {
    if !ub.is_finite() || !lb.is_finite() {
        return f64::INFINITY;
    }
    (ub - lb) / ub.abs().max(1e-9)
}

enum AnyMaster {
    Monolithic(Master),
    Patterns(PatternMaster),
}

impl AnyMaster {
    fn new(case: &NetworkCase, strategy: MasterStrategy, nominal: &UncertaintyRealization) -> Result<Self, SolveError> {
        let patterns = match strategy {
            MasterStrategy::Monolithic => false,
            MasterStrategy::HourPatterns => true,
            MasterStrategy::Auto => case.lines.len() <= MAX_PATTERN_LINES,
        };
        let s = std::slice::from_ref(nominal);
        Ok(if patterns {
            AnyMaster::Patterns(PatternMaster::new(case, s)?)
        } else {
            AnyMaster::Monolithic(build_master(case, s)?)
        })
    }

    fn solve(&self, gap: f64) -> Result<MasterOutcome, SolveError> {
        match self {
            AnyMaster::Monolithic(m) => m.solve(gap),
            AnyMaster::Patterns(m) => m.solve(gap),
        }
    }

    fn contains(&self, r: &UncertaintyRealization) -> bool {
        match self {
            AnyMaster::Monolithic(m) => m.contains(r),
            AnyMaster::Patterns(m) => m.contains(r),
        }
    }

    fn append(&mut self, r: &UncertaintyRealization) -> Result<(), SolveError> {
        match self {
            AnyMaster::Monolithic(m) => m.append_scenario(r),
            AnyMaster::Patterns(m) => m.append_scenario(r),
        }
    }
}

/// Runs the loop with the default master strategy.
pub fn run_ccg(case: &NetworkCase) -> Result<CcgResult, SolveError> {
    run_ccg_with(case, MasterStrategy::Auto)
}

pub fn run_ccg_with(case: &NetworkCase, strategy: MasterStrategy) -> Result<CcgResult, SolveError> {
    case.validate()?;
    let params = &case.params;
    let nominal = UncertaintyRealization::nominal(case);
    let mut master = AnyMaster::new(case, strategy, &nominal)?;
    let master_gap = params.convergence_gap / 10.0;

    let mut lb = f64::NEG_INFINITY;
    let mut ub = f64::INFINITY;
    let mut best: Option<(MasterOutcome, UncertaintyRealization, Dispatch)> = None;
    let mut records = Vec::new();
    let mut status = CcgStatus::IterationLimit;

    for iteration in 0..params.max_iterations {
        let start = Instant::now();
        let out = master.solve(master_gap)?;
        let master_seconds = start.elapsed().as_secs_f64();
        lb = lb.max(out.bound);

        let start = Instant::now();
        let wc = worst_case(case, &out.line_status)?;
        let subproblem_seconds = start.elapsed().as_secs_f64();
        if wc.cost < ub {
            ub = wc.cost;
            best = Some((out.clone(), wc.realization.clone(), wc.dispatch.clone()));
        }
        let gap = relative_gap(lb, ub);
        records.push(IterationRecord {
            iteration,
            lower_bound: lb,
            upper_bound: ub,
            gap,
            worst_cost: wc.cost,
            realization: wc.realization.clone(),
            line_status: out.line_status.clone(),
            master_nodes: out.nodes,
            master_seconds,
            subproblem_seconds,
        });
        if gap <= params.convergence_gap {
            status = CcgStatus::Converged;
            break;
        }
        if master.contains(&wc.realization) {
            status = CcgStatus::Stalled;
            break;
        }
        master.append(&wc.realization)?;
    }

    let (out, worst, worst_dispatch) = best.ok_or_else(|| SolveError::Internal("no iteration ran".into()))?;
    let plan = FirstStageSolution::from_lines(case, out.line_status, out.surrogate, lb)?;
    Ok(CcgResult {
        plan,
        trace: CcgTrace {
            iterations: records,
            status,
        },
        lower_bound: lb,
        upper_bound: ub,
        worst_case: worst,
        worst_dispatch,
    })
}

/// Enumerates every budget-feasible vertex and returns the most expensive
/// one for the given plan; ties go to the lexicographically smallest
/// indicator vector.
pub fn brute_force_worst_case(
    case: &NetworkCase,
    line_status: &[Vec<bool>],
) -> Result<(UncertaintyRealization, f64), SolveError> {
    let mut entries = Vec::new();
    for t in 0..case.horizon {
        for (d, p) in case.demands.iter().enumerate() {
            if p.deviation[t] > 0.0 {
                entries.push((t, true, d));
            }
        }
        for (s, p) in case.solar.iter().enumerate() {
            if p.deviation[t] > 0.0 {
                entries.push((t, false, s));
            }
        }
    }
    let n = entries.len();
    if n > ENUMERATION_LIMIT {
        return Err(SolveError::EnumerationBound {
            count: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let budget = case.params.budget as usize;
    let masks: Vec<u32> = (0..1u32 << n).filter(|m| m.count_ones() as usize <= budget).collect();
    let build = |mask: u32| {
        let mut up = vec![vec![false; case.demands.len()]; case.horizon];
        let mut down = vec![vec![false; case.solar.len()]; case.horizon];
        for (k, &(t, is_demand, e)) in entries.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if is_demand {
                    up[t][e] = true;
                } else {
                    down[t][e] = true;
                }
            }
        }
        UncertaintyRealization::from_indicators(case, up, down)
    };
    let costs: Vec<Result<f64, SolveError>> = masks
        .par_iter()
        .map(|&m| solve_recourse(case, line_status, &build(m)).map(|d| d.cost))
        .collect();
    let mut best: Option<(f64, Vec<bool>, u32)> = None;
    for (&m, c) in masks.iter().zip(costs) {
        let c = c?;
        let bits: Vec<bool> = (0..n).map(|k| m >> k & 1 == 1).collect();
        let replace = match &best {
            None => true,
            Some((bc, bb, _)) => {
                let tol = 1e-9 * (1.0 + bc.abs());
                c > bc + tol || ((c - bc).abs() <= tol && bits < *bb)
            }
        };
        if replace {
            best = Some((c, bits, m));
        }
    }
    let (cost, _, mask) = best.expect("the empty mask is always feasible");
    Ok((build(mask), cost))
}

/// Worst-case cost of a fixed plan by enumeration. The first stage carries
/// no cost of its own, so this is the robust objective of the plan.
pub fn robust_objective(case: &NetworkCase, line_status: &[Vec<bool>]) -> Result<f64, SolveError> {
    brute_force_worst_case(case, line_status).map(|r| r.1)
}
