//! Line risk of operation and solar siting comparisons.

use serde::{Deserialize, Serialize};

use crate::case::{NetworkCase, RiskIntakeMode};
use crate::cases::add_solar;
use crate::ccg::{run_ccg, CcgResult, CcgStatus};
use crate::dispatch::Dispatch;
use crate::error::{CaseError, SolveError};
use crate::master::FirstStageSolution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub line_labels: Vec<String>,
    /// Per line: scores summed over the hours it is energized.
    pub line_risk: Vec<f64>,
    /// `[hour][line]`.
    pub line_status: Vec<Vec<bool>>,
    pub energized_percent: f64,
    pub served_percent: f64,
    pub cost: f64,
}

pub fn energized_percent(status: &[Vec<bool>]) -> f64 {
    let total: usize = status.iter().map(|r| r.len()).sum();
    if total == 0 {
        return 0.0;
    }
    let on = status.iter().flatten().filter(|&&b| b).count();
    100.0 * on as f64 / total as f64
}

fn report(case: &NetworkCase, plan: &FirstStageSolution, dispatch: &Dispatch, cost: f64) -> RiskReport {
    let line_risk = (0..case.lines.len())
        .map(|l| plan.scores.iter().map(|row| row[l]).sum())
        .collect();
    RiskReport {
        line_labels: case.lines.iter().map(|l| l.label.clone()).collect(),
        line_risk,
        line_status: plan.line_status.clone(),
        energized_percent: energized_percent(&plan.line_status),
        served_percent: dispatch.served_percent(),
        cost,
    }
}

/// Risk report of a plan at its nominal dispatch.
pub fn quantify_line_risk(case: &NetworkCase, plan: &FirstStageSolution) -> RiskReport {
    report(case, plan, &plan.dispatch, plan.dispatch.cost)
}

/// Risk report of a robust solve: cost and served load are those of the
/// plan's worst realization.
pub fn robust_risk_report(case: &NetworkCase, result: &CcgResult) -> RiskReport {
    report(case, &result.plan, &result.worst_dispatch, result.upper_bound)
}

/// A placement of solar capacity: `(bus label, MW)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Siting {
    pub name: String,
    pub sites: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SitingRow {
    pub siting: String,
    pub mode: RiskIntakeMode,
    pub cost: f64,
    pub lower_bound: f64,
    pub energized_percent: f64,
    pub served_percent: f64,
    pub status: CcgStatus,
}

/// Adds each siting's solar units to `case` (deviation `deviation_fraction`
/// of nominal) and solves it under both intake modes.
pub fn compare_solar_siting(
    case: &NetworkCase,
    total_solar: f64,
    sitings: &[Siting],
    deviation_fraction: f64,
) -> Result<Vec<SitingRow>, SolveError> {
    for s in sitings {
        let sum: f64 = s.sites.iter().map(|p| p.1).sum();
        if (sum - total_solar).abs() > 1e-6 * (1.0 + total_solar.abs()) {
            return Err(CaseError::Invalid {
                entity: format!("siting {}", s.name),
                message: format!("places {sum} MW, expected {total_solar} MW"),
            }
            .into());
        }
    }
    let mut rows = Vec::new();
    for s in sitings {
        let mut c = case.clone();
        for (k, (bus, mw)) in s.sites.iter().enumerate() {
            add_solar(&mut c, &format!("PV{}_{bus}", k + 1), bus, *mw)?;
        }
        c.set_deviation_fraction(deviation_fraction);
        for mode in [RiskIntakeMode::Conservative, RiskIntakeMode::Cumulative] {
            c.params.risk_intake_mode = mode;
            let r = run_ccg(&c)?;
            let rep = robust_risk_report(&c, &r);
            rows.push(SitingRow {
                siting: s.name.clone(),
                mode,
                cost: r.upper_bound,
                lower_bound: r.lower_bound,
                energized_percent: rep.energized_percent,
                served_percent: rep.served_percent,
                status: r.trace.status,
            });
        }
    }
    Ok(rows)
}
