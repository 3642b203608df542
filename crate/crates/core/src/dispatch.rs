//! Second-stage dispatch model: DC power flow with piecewise-linear
//! generation cost and penalized load shedding, one block per hour.

use firegrid_lp::{solve_lp, LinearProgram, LpStatus, Relation, Sense};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::case::NetworkCase;
use crate::error::SolveError;
use crate::realization::UncertaintyRealization;

/// How lines enter an hour block.
#[derive(Debug, Clone, Copy)]
pub enum LineState<'a> {
    /// Status known; de-energized lines are left out of the block.
    Fixed(&'a [bool]),
    /// Status given by binary variables, one per line, with big-M rows.
    Switched(&'a [usize]),
}

/// Primal variable tags; the dual subproblem names its rows by these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarTag {
    Segment { hour: usize, gen: usize, seg: usize },
    Generation { hour: usize, gen: usize },
    Spill { hour: usize, gen: usize },
    Solar { hour: usize, unit: usize },
    Served { hour: usize, demand: usize },
    Flow { hour: usize, line: usize },
    Angle { hour: usize, bus: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RowTag {
    SegmentSum { hour: usize, gen: usize },
    Balance { hour: usize, bus: usize },
    /// Flow-angle equality of an energized line.
    FlowAngle { hour: usize, line: usize },
    FlowUpper { hour: usize, line: usize },
    FlowLower { hour: usize, line: usize },
    AngleUpper { hour: usize, line: usize },
    AngleLower { hour: usize, line: usize },
}

/// Variable and row indices of one hour inside a larger program.
#[derive(Debug, Clone)]
pub struct HourBlock {
    pub hour: usize,
    pub seg: Vec<Vec<usize>>,
    pub gen: Vec<usize>,
    pub spill: Vec<Option<usize>>,
    pub solar: Vec<usize>,
    pub served: Vec<usize>,
    pub flow: Vec<Option<usize>>,
    /// `None` for the reference bus, whose angle is zero.
    pub angle: Vec<Option<usize>>,
    pub vars: Vec<(usize, VarTag)>,
    pub rows: Vec<(usize, RowTag)>,
    /// Terms of `Σ c·P_seg − K·Σ P_served`.
    pub cost: Vec<(usize, f64)>,
    /// `K·Σ P_D`, the shedding penalty if nothing were served.
    pub constant: f64,
}

/// Appends the dispatch model of `hour` to `lp`. Costs are returned in the
/// block, not written into the objective.
pub fn add_hour_block(
    lp: &mut LinearProgram,
    case: &NetworkCase,
    hour: usize,
    lines: LineState<'_>,
    demand: &[f64],
    solar: &[f64],
) -> HourBlock {
    let k = case.params.shed_penalty;
    let mut vars = Vec::new();
    let mut rows = Vec::new();
    let mut cost = Vec::new();
    let mut var = |lp: &mut LinearProgram, lo: f64, up: f64, tag: VarTag| {
        let j = lp.add_var(lo, up, 0.0);
        vars.push((j, tag));
        j
    };

    let mut seg = Vec::with_capacity(case.generators.len());
    let mut gen = Vec::with_capacity(case.generators.len());
    let mut spill = Vec::with_capacity(case.generators.len());
    for (g, unit) in case.generators.iter().enumerate() {
        let s: Vec<usize> = unit
            .segments
            .iter()
            .enumerate()
            .map(|(n, sg)| {
                let j = var(lp, 0.0, sg.width, VarTag::Segment { hour, gen: g, seg: n });
                cost.push((j, sg.marginal_cost));
                j
            })
            .collect();
        seg.push(s);
        gen.push(var(lp, unit.p_min, unit.p_max, VarTag::Generation { hour, gen: g }));
        spill.push((unit.p_min > 0.0).then(|| var(lp, 0.0, unit.p_max, VarTag::Spill { hour, gen: g })));
    }
    let solar_vars: Vec<usize> = (0..case.solar.len())
        .map(|s| var(lp, 0.0, solar[s], VarTag::Solar { hour, unit: s }))
        .collect();
    let served: Vec<usize> = (0..case.demands.len())
        .map(|d| {
            let j = var(lp, 0.0, demand[d], VarTag::Served { hour, demand: d });
            cost.push((j, -k));
            j
        })
        .collect();
    let flow: Vec<Option<usize>> = case
        .lines
        .iter()
        .enumerate()
        .map(|(l, line)| {
            let on = match lines {
                LineState::Fixed(st) => st[l],
                LineState::Switched(_) => true,
            };
            on.then(|| var(lp, -line.limit, line.limit, VarTag::Flow { hour, line: l }))
        })
        .collect();
    let reference = case.reference_bus();
    let angle: Vec<Option<usize>> = (0..case.buses.len())
        .map(|i| (i != reference).then(|| var(lp, -PI, PI, VarTag::Angle { hour, bus: i })))
        .collect();

    for (g, s) in seg.iter().enumerate() {
        let mut c: Vec<(usize, f64)> = s.iter().map(|&j| (j, 1.0)).collect();
        c.push((gen[g], -1.0));
        let r = lp.add_row(c, Relation::Eq, 0.0);
        rows.push((r, RowTag::SegmentSum { hour, gen: g }));
    }

    let mut balance_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); case.buses.len()];
    for (g, unit) in case.generators.iter().enumerate() {
        balance_terms[unit.bus].push((gen[g], 1.0));
        if let Some(w) = spill[g] {
            balance_terms[unit.bus].push((w, -1.0));
        }
    }
    for (s, unit) in case.solar.iter().enumerate() {
        balance_terms[unit.bus].push((solar_vars[s], 1.0));
    }
    for (l, line) in case.lines.iter().enumerate() {
        if let Some(f) = flow[l] {
            balance_terms[line.to].push((f, 1.0));
            balance_terms[line.from].push((f, -1.0));
        }
    }
    for (d, p) in case.demands.iter().enumerate() {
        balance_terms[p.bus].push((served[d], -1.0));
    }
    let mut balance = Vec::with_capacity(case.buses.len());
    for (i, terms) in balance_terms.into_iter().enumerate() {
        let r = lp.add_row(terms, Relation::Eq, 0.0);
        rows.push((r, RowTag::Balance { hour, bus: i }));
        balance.push(r);
    }

    for (l, line) in case.lines.iter().enumerate() {
        let Some(f) = flow[l] else { continue };
        let b = case.base_mva / line.reactance;
        let mut c = vec![(f, 1.0)];
        if let Some(a) = angle[line.from] {
            c.push((a, -b));
        }
        if let Some(a) = angle[line.to] {
            c.push((a, b));
        }
        match lines {
            LineState::Fixed(_) => {
                let r = lp.add_row(c, Relation::Eq, 0.0);
                rows.push((r, RowTag::FlowAngle { hour, line: l }));
            }
            LineState::Switched(ivars) => {
                let z = ivars[l];
                let m = case.line_big_m(l);
                let r = lp.add_row(vec![(f, 1.0), (z, -line.limit)], Relation::Le, 0.0);
                rows.push((r, RowTag::FlowUpper { hour, line: l }));
                let r = lp.add_row(vec![(f, 1.0), (z, line.limit)], Relation::Ge, 0.0);
                rows.push((r, RowTag::FlowLower { hour, line: l }));
                let mut up = c.clone();
                up.push((z, m));
                let r = lp.add_row(up, Relation::Le, m);
                rows.push((r, RowTag::AngleUpper { hour, line: l }));
                let mut lo = c;
                lo.push((z, -m));
                let r = lp.add_row(lo, Relation::Ge, -m);
                rows.push((r, RowTag::AngleLower { hour, line: l }));
            }
        }
    }

    HourBlock {
        hour,
        seg,
        gen,
        spill,
        solar: solar_vars,
        served,
        flow,
        angle,
        vars,
        rows,
        cost,
        constant: k * demand.iter().sum::<f64>(),
    }
}

/// Second-stage decisions over the horizon; matrices are `[hour][entity]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub generation: Vec<Vec<f64>>,
    pub segments: Vec<Vec<Vec<f64>>>,
    pub spill: Vec<Vec<f64>>,
    pub solar: Vec<Vec<f64>>,
    pub served: Vec<Vec<f64>>,
    pub demand: Vec<Vec<f64>>,
    pub flow: Vec<Vec<f64>>,
    pub angle: Vec<Vec<f64>>,
    /// Generation cost plus shedding penalty, $.
    pub cost: f64,
}

impl Dispatch {
    pub(crate) fn read(blocks: &[HourBlock], x: &[f64], cost: f64) -> Self {
        let val = |o: &Option<usize>| o.map_or(0.0, |j| x[j]);
        Dispatch {
            generation: blocks.iter().map(|b| b.gen.iter().map(|&j| x[j]).collect()).collect(),
            segments: blocks
                .iter()
                .map(|b| b.seg.iter().map(|s| s.iter().map(|&j| x[j]).collect()).collect())
                .collect(),
            spill: blocks.iter().map(|b| b.spill.iter().map(val).collect()).collect(),
            solar: blocks.iter().map(|b| b.solar.iter().map(|&j| x[j]).collect()).collect(),
            served: blocks.iter().map(|b| b.served.iter().map(|&j| x[j]).collect()).collect(),
            demand: Vec::new(),
            flow: blocks.iter().map(|b| b.flow.iter().map(val).collect()).collect(),
            angle: blocks.iter().map(|b| b.angle.iter().map(val).collect()).collect(),
            cost,
        }
    }

    pub fn shed_energy(&self) -> f64 {
        self.demand
            .iter()
            .flatten()
            .zip(self.served.iter().flatten())
            .map(|(d, s)| d - s)
            .sum()
    }

    /// Served energy as a percentage of demand (100 when there is no demand).
    pub fn served_percent(&self) -> f64 {
        let total: f64 = self.demand.iter().flatten().sum();
        if total <= 0.0 {
            return 100.0;
        }
        let served: f64 = self.served.iter().flatten().sum();
        (100.0 * served / total).clamp(0.0, 100.0)
    }

    /// Largest violation of the nodal balance over all buses and hours.
    pub fn balance_residual(&self, case: &NetworkCase) -> f64 {
        let mut worst: f64 = 0.0;
        for t in 0..self.generation.len() {
            let mut net = vec![0.0; case.buses.len()];
            for (g, unit) in case.generators.iter().enumerate() {
                net[unit.bus] += self.generation[t][g] - self.spill[t][g];
            }
            for (s, unit) in case.solar.iter().enumerate() {
                net[unit.bus] += self.solar[t][s];
            }
            for (l, line) in case.lines.iter().enumerate() {
                net[line.to] += self.flow[t][l];
                net[line.from] -= self.flow[t][l];
            }
            for (d, p) in case.demands.iter().enumerate() {
                net[p.bus] -= self.served[t][d];
            }
            worst = net.iter().fold(worst, |w, v| w.max(v.abs()));
        }
        worst
    }
}

fn check_lines(case: &NetworkCase, lines: &[Vec<bool>]) -> Result<(), SolveError> {
    if lines.len() != case.horizon || lines.iter().any(|r| r.len() != case.lines.len()) {
        return Err(SolveError::PlanShape(format!(
            "line status must be {} hours × {} lines",
            case.horizon,
            case.lines.len()
        )));
    }
    Ok(())
}

/// Builds the whole-horizon second-stage LP for fixed line status.
pub fn recourse_lp(
    case: &NetworkCase,
    lines: &[Vec<bool>],
    realization: &UncertaintyRealization,
) -> Result<(LinearProgram, Vec<HourBlock>), SolveError> {
    check_lines(case, lines)?;
    let mut lp = LinearProgram::new(Sense::Min);
    let mut blocks = Vec::with_capacity(case.horizon);
    for t in 0..case.horizon {
        let b = add_hour_block(
            &mut lp,
            case,
            t,
            LineState::Fixed(&lines[t]),
            &realization.demand[t],
            &realization.solar[t],
        );
        for &(j, c) in &b.cost {
            lp.objective[j] += c;
        }
        lp.objective_offset += b.constant;
        blocks.push(b);
    }
    Ok((lp, blocks))
}

/// Solves the second stage for fixed line status and realization.
pub fn solve_recourse(
    case: &NetworkCase,
    lines: &[Vec<bool>],
    realization: &UncertaintyRealization,
) -> Result<Dispatch, SolveError> {
    let (lp, blocks) = recourse_lp(case, lines, realization)?;
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::Internal(format!(
            "second-stage dispatch reported {:?}; shedding and spill should keep it feasible",
            sol.status
        )));
    }
    let mut d = Dispatch::read(&blocks, &sol.x, sol.objective);
    d.demand = realization.demand.clone();
    Ok(d)
}

/// Builds the second-stage LP of a single hour.
pub fn hour_lp(
    case: &NetworkCase,
    hour: usize,
    lines: &[bool],
    demand: &[f64],
    solar: &[f64],
) -> (LinearProgram, HourBlock) {
    let mut lp = LinearProgram::new(Sense::Min);
    let b = add_hour_block(&mut lp, case, hour, LineState::Fixed(lines), demand, solar);
    for &(j, c) in &b.cost {
        lp.objective[j] += c;
    }
    lp.objective_offset = b.constant;
    (lp, b)
}

/// Optimal second-stage cost of a single hour.
pub fn hour_cost(case: &NetworkCase, hour: usize, lines: &[bool], demand: &[f64], solar: &[f64]) -> Result<f64, SolveError> {
    let (lp, _) = hour_lp(case, hour, lines, demand, solar);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SolveError::Internal(format!("hour {hour} dispatch reported {:?}", sol.status)));
    }
    Ok(sol.objective)
}
