//! Master problem solved over per-hour line patterns.
//!
//! With the line status fixed the recourse splits by hour, so the master
//! optimum is `min over patterns of max_s Σ_t f_t^s(pattern_t)`. Each hour's
//! candidate patterns are enumerated, their recourse costs cached per hour
//! realization, dominated patterns dropped, and the remaining choice solved as
//! a multiple-choice program.

use firegrid_lp::{solve_milp, LinearProgram, MilpOptions, MilpStatus, MixedIntegerProgram, Relation, Sense};
use std::collections::{HashMap, HashSet};

use crate::case::{NetworkCase, RiskIntakeMode};
use crate::dispatch::hour_cost;
use crate::error::SolveError;
use crate::master::MasterOutcome;
use crate::realization::UncertaintyRealization;

/// Largest line count for which patterns are enumerated (2^12 per hour).
pub const MAX_PATTERN_LINES: usize = 12;

#[derive(Debug, Clone)]
pub struct PatternMaster {
    case: NetworkCase,
    pub scenarios: Vec<UncertaintyRealization>,
    keys: HashSet<Vec<bool>>,
    /// Risk-feasible masks per hour, most preferred first.
    patterns: Vec<Vec<u64>>,
    risk: Vec<Vec<f64>>,
    cache: HashMap<(usize, u64, Vec<bool>), f64>,
    /// `[scenario][hour][pattern]` recourse costs.
    costs: Vec<Vec<Vec<f64>>>,
    /// Hour LPs solved so far.
    pub lp_solves: usize,
}

fn mask_status(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|l| mask >> l & 1 == 1).collect()
}

impl PatternMaster {
    pub fn new(case: &NetworkCase, scenarios: &[UncertaintyRealization]) -> Result<Self, SolveError> {
        if scenarios.is_empty() {
            return Err(SolveError::NoScenarios);
        }
        let nl = case.lines.len();
        if nl > MAX_PATTERN_LINES {
            return Err(SolveError::TooManyPatterns(1usize << nl.min(63)));
        }
        let eps = case.params.risk_tolerance;
        let mut patterns = Vec::with_capacity(case.horizon);
        let mut risk = Vec::with_capacity(case.horizon);
        for t in 0..case.horizon {
            let mut feasible: Vec<(u64, f64)> = (0..1u64 << nl)
                .map(|m| {
                    let r: f64 = (0..nl).filter(|&l| m >> l & 1 == 1).map(|l| case.fire_scores.get(l, t)).sum();
                    (m, r)
                })
                .filter(|&(_, r)| r <= eps + 1e-12)
                .collect();
            // More energized lines first, then the lexicographically larger
            // status vector (line 0 most significant).
            let key = |m: u64| {
                let v: Vec<bool> = mask_status(m, nl);
                (std::cmp::Reverse(m.count_ones()), std::cmp::Reverse(v))
            };
            feasible.sort_by(|a, b| key(a.0).cmp(&key(b.0)));
            patterns.push(feasible.iter().map(|p| p.0).collect());
            risk.push(feasible.iter().map(|p| p.1).collect());
        }
        let mut pm = PatternMaster {
            case: case.clone(),
            scenarios: Vec::new(),
            keys: HashSet::new(),
            patterns,
            risk,
            cache: HashMap::new(),
            costs: Vec::new(),
            lp_solves: 0,
        };
        for s in scenarios {
            pm.append_scenario(s)?;
        }
        Ok(pm)
    }

    pub fn contains(&self, realization: &UncertaintyRealization) -> bool {
        self.keys.contains(&realization.key())
    }

    pub fn append_scenario(&mut self, realization: &UncertaintyRealization) -> Result<(), SolveError> {
        if let Some(pos) = self.scenarios.iter().position(|s| s.key() == realization.key()) {
            return Err(SolveError::DuplicateScenario(pos));
        }
        let nl = self.case.lines.len();
        let mut per_hour = Vec::with_capacity(self.case.horizon);
        for t in 0..self.case.horizon {
            let hk = realization.hour_key(t);
            let mut row = Vec::with_capacity(self.patterns[t].len());
            for &m in &self.patterns[t] {
                let key = (t, m, hk.clone());
                let v = match self.cache.get(&key) {
                    Some(&v) => v,
                    None => {
                        let v = hour_cost(
                            &self.case,
                            t,
                            &mask_status(m, nl),
                            &realization.demand[t],
                            &realization.solar[t],
                        )?;
                        self.lp_solves += 1;
                        self.cache.insert(key, v);
                        v
                    }
                };
                row.push(v);
            }
            per_hour.push(row);
        }
        self.costs.push(per_hour);
        self.keys.insert(realization.key());
        self.scenarios.push(realization.clone());
        Ok(())
    }

    /// Patterns of hour `t` that survive dominance, in preference order.
    fn kept(&self, t: usize) -> Vec<usize> {
        let cumulative = self.case.params.risk_intake_mode == RiskIntakeMode::Cumulative;
        let ns = self.scenarios.len();
        let f = |k: usize, s: usize| self.costs[s][t][k];
        let tol = |v: f64| 1e-9 * (1.0 + v.abs());
        // a weakly dominates b
        let weak = |a: usize, b: usize| {
            (!cumulative || self.risk[t][a] <= self.risk[t][b] + 1e-12) && (0..ns).all(|s| f(a, s) <= f(b, s) + tol(f(b, s)))
        };
        let strict = |a: usize, b: usize| {
            weak(a, b)
                && ((cumulative && self.risk[t][a] < self.risk[t][b] - 1e-12)
                    || (0..ns).any(|s| f(a, s) < f(b, s) - tol(f(b, s))))
        };
        let mut kept: Vec<usize> = Vec::new();
        for k in 0..self.patterns[t].len() {
            if kept.iter().any(|&a| weak(a, k)) {
                continue;
            }
            kept.retain(|&a| !strict(k, a));
            kept.push(k);
        }
        kept
    }

    /// Number of patterns per hour after dominance.
    pub fn kept_counts(&self) -> Vec<usize> {
        (0..self.case.horizon).map(|t| self.kept(t).len()).collect()
    }

    pub fn solve(&self, gap: f64) -> Result<MasterOutcome, SolveError> {
        let t_n = self.case.horizon;
        let ns = self.scenarios.len();
        let nl = self.case.lines.len();
        let mut lp = LinearProgram::new(Sense::Min);
        let e = lp.add_var(f64::NEG_INFINITY, f64::INFINITY, 1.0);
        let mut binaries = Vec::new();
        let mut choice: Vec<Vec<(usize, Option<usize>)>> = Vec::with_capacity(t_n);
        let mut cuts: Vec<Vec<(usize, f64)>> = vec![vec![(e, 1.0)]; ns];
        let mut constants = vec![0.0; ns];
        let mut risk_terms = Vec::new();
        let mut risk_fixed = 0.0;
        for t in 0..t_n {
            let kept = self.kept(t);
            if kept.is_empty() {
                return Err(SolveError::MasterInfeasible(vec![format!("risk budget at hour {}", t + 1)]));
            }
            if kept.len() == 1 {
                let k = kept[0];
                for s in 0..ns {
                    constants[s] += self.costs[s][t][k];
                }
                risk_fixed += self.risk[t][k];
                choice.push(vec![(k, None)]);
                continue;
            }
            let mut row = Vec::with_capacity(kept.len());
            let mut one = Vec::with_capacity(kept.len());
            for &k in &kept {
                let z = lp.add_var(0.0, 1.0, 0.0);
                binaries.push(z);
                one.push((z, 1.0));
                for s in 0..ns {
                    cuts[s].push((z, -self.costs[s][t][k]));
                }
                if self.risk[t][k] > 0.0 {
                    risk_terms.push((z, self.risk[t][k]));
                }
                row.push((k, Some(z)));
            }
            lp.add_row(one, Relation::Eq, 1.0);
            choice.push(row);
        }
        for (c, k) in cuts.into_iter().zip(constants) {
            lp.add_row(c, Relation::Ge, k);
        }
        if self.case.params.risk_intake_mode == RiskIntakeMode::Cumulative {
            let budget = self.case.params.risk_tolerance - risk_fixed;
            if budget < -1e-12 {
                return Err(SolveError::MasterInfeasible(vec!["horizon risk budget".into()]));
            }
            if !risk_terms.is_empty() {
                lp.add_row(risk_terms, Relation::Le, budget.max(0.0) + 1e-12);
            }
        }
        let mip = MixedIntegerProgram::new(lp, binaries);
        let opts = MilpOptions {
            gap,
            abs_gap: 1e-9,
            ..Default::default()
        };
        let sol = solve_milp(&mip, &opts)?;
        match sol.status {
            MilpStatus::Optimal => {}
            MilpStatus::Infeasible => return Err(SolveError::MasterInfeasible(vec!["horizon risk budget".into()])),
            other => return Err(SolveError::Internal(format!("pattern master ended with {other:?}"))),
        }
        let line_status = choice
            .iter()
            .enumerate()
            .map(|(t, opts)| {
                let k = opts
                    .iter()
                    .find(|(_, z)| z.map_or(true, |z| sol.x[z] > 0.5))
                    .map(|p| p.0)
                    .expect("one pattern per hour");
                mask_status(self.patterns[t][k], nl)
            })
            .collect();
        Ok(MasterOutcome {
            line_status,
            surrogate: sol.objective,
            bound: sol.best_bound,
            nodes: sol.nodes,
        })
    }
}
