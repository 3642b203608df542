use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;

/// One vertex of the uncertainty set: which demands went up and which solar
/// units went down in each hour, plus the resulting profiles.
///
/// All matrices are indexed `[hour][entity]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRealization {
    pub demand_up: Vec<Vec<bool>>,
    pub demand_down: Vec<Vec<bool>>,
    pub solar_down: Vec<Vec<bool>>,
    pub solar_up: Vec<Vec<bool>>,
    /// Realized demand, MW.
    pub demand: Vec<Vec<f64>>,
    /// Realized solar availability, MW.
    pub solar: Vec<Vec<f64>>,
}

impl UncertaintyRealization {
    pub fn nominal(case: &NetworkCase) -> Self {
        let t = case.horizon;
        Self::from_indicators(
            case,
            vec![vec![false; case.demands.len()]; t],
            vec![vec![false; case.solar.len()]; t],
        )
    }

    /// Builds the realization for the adversarial directions used by the
    /// worst-case search: demand up, solar down.
    pub fn from_indicators(case: &NetworkCase, demand_up: Vec<Vec<bool>>, solar_down: Vec<Vec<bool>>) -> Self {
        let t = case.horizon;
        let demand = (0..t)
            .map(|h| {
                case.demands
                    .iter()
                    .enumerate()
                    .map(|(d, p)| p.nominal[h] + if demand_up[h][d] { p.deviation[h] } else { 0.0 })
                    .collect()
            })
            .collect();
        let solar = (0..t)
            .map(|h| {
                case.solar
                    .iter()
                    .enumerate()
                    .map(|(s, p)| p.nominal[h] - if solar_down[h][s] { p.deviation[h] } else { 0.0 })
                    .collect()
            })
            .collect();
        UncertaintyRealization {
            demand_down: vec![vec![false; case.demands.len()]; t],
            solar_up: vec![vec![false; case.solar.len()]; t],
            demand_up,
            solar_down,
            demand,
            solar,
        }
    }

    /// Number of active indicators counted against the budget.
    pub fn budget_used(&self) -> usize {
        let c = |m: &Vec<Vec<bool>>| m.iter().flatten().filter(|&&b| b).count();
        c(&self.demand_up) + c(&self.solar_down)
    }

    /// Indicator snapshot used to detect repeated scenarios.
    pub fn key(&self) -> Vec<bool> {
        let mut k = Vec::new();
        for m in [&self.demand_up, &self.demand_down, &self.solar_down, &self.solar_up] {
            for row in m {
                k.extend_from_slice(row);
            }
        }
        k
    }

    /// Indicators of one hour, demand first then solar.
    pub fn hour_key(&self, hour: usize) -> Vec<bool> {
        let mut k = self.demand_up[hour].clone();
        k.extend_from_slice(&self.demand_down[hour]);
        k.extend_from_slice(&self.solar_down[hour]);
        k.extend_from_slice(&self.solar_up[hour]);
        k
    }

    /// Checks shapes, u + v ≤ 1, the realized values and the budget.
    pub fn check(&self, case: &NetworkCase) -> Result<(), String> {
        let t = case.horizon;
        let (nd, ns) = (case.demands.len(), case.solar.len());
        let shape = |m: &Vec<Vec<bool>>, n: usize| m.len() == t && m.iter().all(|r| r.len() == n);
        if !(shape(&self.demand_up, nd)
            && shape(&self.demand_down, nd)
            && shape(&self.solar_down, ns)
            && shape(&self.solar_up, ns))
        {
            return Err("indicator matrices do not match the case".into());
        }
        for h in 0..t {
            for d in 0..nd {
                if self.demand_up[h][d] && self.demand_down[h][d] {
                    return Err(format!("demand {d} hour {h}: both directions active"));
                }
                let p = &case.demands[d];
                let sign = self.demand_up[h][d] as i32 - self.demand_down[h][d] as i32;
                let want = p.nominal[h] + sign as f64 * p.deviation[h];
                if (self.demand[h][d] - want).abs() > 1e-9 * (1.0 + want.abs()) {
                    return Err(format!("demand {d} hour {h}: realized {} expected {want}", self.demand[h][d]));
                }
            }
            for s in 0..ns {
                if self.solar_down[h][s] && self.solar_up[h][s] {
                    return Err(format!("solar {s} hour {h}: both directions active"));
                }
                let p = &case.solar[s];
                let sign = self.solar_up[h][s] as i32 - self.solar_down[h][s] as i32;
                let want = p.nominal[h] + sign as f64 * p.deviation[h];
                if (self.solar[h][s] - want).abs() > 1e-9 * (1.0 + want.abs()) {
                    return Err(format!("solar {s} hour {h}: realized {} expected {want}", self.solar[h][s]));
                }
            }
        }
        if self.budget_used() > case.params.budget as usize {
            return Err(format!(
                "{} active indicators exceed the budget {}",
                self.budget_used(),
                case.params.budget
            ));
        }
        Ok(())
    }
}
