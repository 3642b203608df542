//! Parameter sweeps over one axis with a monotonicity summary.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case::{NetworkCase, RobustParams};
use crate::cases::solar_profile;
use crate::ccg::{run_ccg_with, MasterStrategy};
use crate::error::CaseError;
use crate::risk::robust_risk_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    RiskTolerance,
    Budget,
    /// Deviation as a percentage of nominal demand and solar.
    Deviation,
    /// Capacity of every solar unit, MW.
    SolarMw,
}

impl SweepAxis {
    /// Direction the robust cost is expected to move as the value grows.
    pub fn expected(self) -> Trend {
        match self {
            SweepAxis::RiskTolerance | SweepAxis::SolarMw => Trend::NonIncreasing,
            SweepAxis::Budget | SweepAxis::Deviation => Trend::NonDecreasing,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::RiskTolerance => "risk_tolerance",
            SweepAxis::Budget => "budget",
            SweepAxis::Deviation => "deviation",
            SweepAxis::SolarMw => "solar_mw",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "risk_tolerance" => Ok(SweepAxis::RiskTolerance),
            "budget" => Ok(SweepAxis::Budget),
            "deviation" => Ok(SweepAxis::Deviation),
            "solar_mw" => Ok(SweepAxis::SolarMw),
            other => Err(format!("unknown sweep axis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    NonIncreasing,
    NonDecreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Parameters shared by every point before the axis value is applied.
    pub fixed: RobustParams,
    /// Deviation percentage applied to every point (ignored on the
    /// deviation axis).
    pub deviation_percent: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CaseError> {
        let bad = |m: String| CaseError::Invalid {
            entity: "sweep".into(),
            message: m,
        };
        if self.values.is_empty() {
            return Err(bad("grid is empty".into()));
        }
        for &v in &self.values {
            let ok = match self.axis {
                SweepAxis::RiskTolerance => v >= 0.0 && v.is_finite(),
                SweepAxis::Budget => v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64,
                SweepAxis::Deviation => (0.0..=100.0).contains(&v),
                SweepAxis::SolarMw => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return Err(bad(format!("{v} is outside the domain of {}", self.axis.name())));
            }
        }
        if let Some(d) = self.deviation_percent {
            if !(0.0..=100.0).contains(&d) {
                return Err(bad(format!("deviation {d}% outside [0, 100]")));
            }
        }
        Ok(())
    }

    /// The case solved at grid point `value`.
    pub fn point_case(&self, base: &NetworkCase, value: f64) -> Result<NetworkCase, CaseError> {
        let mut c = base.clone();
        c.params = self.fixed.clone();
        let mut deviation = self.deviation_percent;
        match self.axis {
            SweepAxis::RiskTolerance => c.params.risk_tolerance = value,
            SweepAxis::Budget => c.params.budget = value as u32,
            SweepAxis::Deviation => deviation = Some(value),
            SweepAxis::SolarMw => {
                if c.solar.is_empty() {
                    return Err(CaseError::Invalid {
                        entity: "sweep".into(),
                        message: "solar_mw axis needs at least one solar unit".into(),
                    });
                }
                for s in &mut c.solar {
                    s.nominal = solar_profile(value, c.horizon);
                    s.deviation = vec![0.0; c.horizon];
                }
            }
        }
        if let Some(d) = deviation {
            c.set_deviation_fraction(d / 100.0);
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub axis: SweepAxis,
    pub value: f64,
    pub status: String,
    pub objective: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap: Option<f64>,
    pub iterations: Option<usize>,
    pub energized_percent: Option<f64>,
    pub served_percent: Option<f64>,
    pub error: Option<String>,
}

/// Solves every grid point on a pool of `workers` threads; rows come back in
/// grid order. Failures are recorded in their row.
pub fn run_sweep(base: &NetworkCase, spec: &SweepSpec, workers: usize, strategy: MasterStrategy) -> Vec<SweepRow> {
    let solve = |(index, &value): (usize, &f64)| {
        let mut row = SweepRow {
            index,
            axis: spec.axis,
            value,
            status: "error".into(),
            objective: None,
            lower_bound: None,
            gap: None,
            iterations: None,
            energized_percent: None,
            served_percent: None,
            error: None,
        };
        let result = spec
            .point_case(base, value)
            .map_err(|e| e.to_string())
            .and_then(|c| run_ccg_with(&c, strategy).map(|r| (c, r)).map_err(|e| e.to_string()));
        match result {
            Ok((c, r)) => {
                let rep = robust_risk_report(&c, &r);
                row.status = serde_json::to_value(r.trace.status)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                row.objective = Some(r.upper_bound);
                row.lower_bound = Some(r.lower_bound);
                row.gap = Some(r.gap());
                row.iterations = Some(r.trace.iterations.len());
                row.energized_percent = Some(rep.energized_percent);
                row.served_percent = Some(rep.served_percent);
            }
            Err(e) => row.error = Some(e),
        }
        row
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| spec.values.par_iter().enumerate().map(solve).collect()),
        Err(_) => spec.values.iter().enumerate().map(solve).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSummary {
    pub axis: SweepAxis,
    pub expected: Trend,
    pub holds: bool,
    /// Consecutive grid indices whose objectives move the wrong way.
    pub violations: Vec<(usize, usize)>,
    /// Points without an objective.
    pub missing: Vec<usize>,
}

/// Checks the expected direction on consecutive solved rows. Each objective
/// is only known to within the relative gap `tol`, so moves smaller than
/// that are not violations.
pub fn monotonicity(axis: SweepAxis, rows: &[SweepRow], tol: f64) -> MonotoneSummary {
    let expected = axis.expected();
    let mut violations = Vec::new();
    let missing: Vec<usize> = rows.iter().filter(|r| r.objective.is_none()).map(|r| r.index).collect();
    let solved: Vec<&SweepRow> = rows.iter().filter(|r| r.objective.is_some()).collect();
    for w in solved.windows(2) {
        let (a, b) = (w[0].objective.unwrap(), w[1].objective.unwrap());
        let slack = tol * a.abs().max(b.abs()) + 1e-9;
        let bad = match expected {
            Trend::NonIncreasing => b > a + slack,
            Trend::NonDecreasing => b < a - slack,
        };
        if bad {
            violations.push((w[0].index, w[1].index));
        }
    }
    MonotoneSummary {
        axis,
        expected,
        holds: violations.is_empty() && missing.is_empty(),
        violations,
        missing,
    }
}
