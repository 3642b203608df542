//! Worst-case search: the dual of the second-stage LP with the uncertain
//! bounds switched by binary indicators under a budget row.

use firegrid_lp::{
    solve_milp_linked, LinearProgram, MilpOptions, MilpStatus, MixedIntegerProgram, Relation, Sense,
};
use serde::{Deserialize, Serialize};

use crate::case::NetworkCase;
use crate::dispatch::{hour_lp, solve_recourse, Dispatch, RowTag, VarTag};
use crate::error::SolveError;
use crate::realization::UncertaintyRealization;

/// An (entity, hour) pair that may deviate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Uncertain {
    DemandUp { hour: usize, demand: usize },
    SolarDown { hour: usize, unit: usize },
}

/// Meaning of a variable in the dual program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DualTag {
    /// Multiplier of a primal row.
    Row(RowTag),
    /// Multiplier of a nonzero finite lower bound.
    Lower(VarTag),
    /// Multiplier of a finite upper bound.
    Upper(VarTag),
    /// Part of an uncertain upper-bound multiplier paid when the indicator is on.
    Phi(VarTag),
    /// The remaining part, allowed only when the indicator is off.
    Psi(VarTag),
    Indicator(Uncertain),
}

#[derive(Debug, Clone)]
pub struct DualSubproblem {
    pub mip: MixedIntegerProgram,
    pub budget_row: usize,
    /// One tag per variable.
    pub tags: Vec<DualTag>,
    /// For each row, the primal variable whose dual constraint it is.
    pub row_tags: Vec<Option<VarTag>>,
    pub indicators: Vec<(usize, Uncertain)>,
    /// `(β, Φ, ψ, u)` variable indices of each linearized product.
    pub products: Vec<(usize, usize, usize, usize)>,
    pub big_m: f64,
    pub line_status: Vec<Vec<bool>>,
}

/// Dual variable values keyed by tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub values: Vec<(DualTag, f64)>,
    pub objective: f64,
}

impl DualSolution {
    pub fn get(&self, tag: &DualTag) -> Option<f64> {
        self.values.iter().find(|(t, _)| t == tag).map(|p| p.1)
    }
}

#[derive(Debug, Clone)]
pub struct WorstCase {
    pub realization: UncertaintyRealization,
    /// Second-stage cost of the realization, re-solved from the primal.
    pub cost: f64,
    /// Optimal value of the dual program.
    pub dual_objective: f64,
    pub dual: DualSolution,
    pub dispatch: Dispatch,
    pub big_m: f64,
    /// Raw incumbent of the dual program.
    pub x: Vec<f64>,
}

/// Builds the dual subproblem for a fixed line plan, with the linearization
/// constant taken from the case parameters.
pub fn build_dual_subproblem(case: &NetworkCase, line_status: &[Vec<bool>], budget: u32) -> Result<DualSubproblem, SolveError> {
    build_with_m(case, line_status, budget, case.params.big_m)
}

pub fn build_with_m(
    case: &NetworkCase,
    line_status: &[Vec<bool>],
    budget: u32,
    big_m: f64,
) -> Result<DualSubproblem, SolveError> {
    if line_status.len() != case.horizon || line_status.iter().any(|r| r.len() != case.lines.len()) {
        return Err(SolveError::PlanShape("missing first-stage line statuses".into()));
    }
    let mut out = LinearProgram::new(Sense::Max);
    let mut tags = Vec::new();
    let mut row_tags: Vec<Option<VarTag>> = Vec::new();
    let mut indicators = Vec::new();
    let mut products = Vec::new();
    let mut binaries = Vec::new();
    let k = case.params.shed_penalty;

    let add = |out: &mut LinearProgram, tags: &mut Vec<DualTag>, lo: f64, up: f64, c: f64, tag: DualTag| {
        let j = out.add_var(lo, up, c);
        tags.push(tag);
        j
    };

    for t in 0..case.horizon {
        let demand: Vec<f64> = case.demands.iter().map(|d| d.nominal[t]).collect();
        let solar: Vec<f64> = case.solar.iter().map(|s| s.nominal[t]).collect();
        let (p, blk) = hour_lp(case, t, &line_status[t], &demand, &solar);

        // Uncertain upper bounds: var -> (signed deviation, indicator var).
        let mut uncertain: Vec<Option<(f64, usize)>> = vec![None; p.num_vars()];
        for (d, dp) in case.demands.iter().enumerate() {
            if dp.deviation[t] > 0.0 {
                let u = add(&mut out, &mut tags, 0.0, 1.0, k * dp.deviation[t], DualTag::Indicator(Uncertain::DemandUp { hour: t, demand: d }));
                binaries.push(u);
                indicators.push((u, Uncertain::DemandUp { hour: t, demand: d }));
                uncertain[blk.served[d]] = Some((dp.deviation[t], u));
            }
        }
        for (s, sp) in case.solar.iter().enumerate() {
            if sp.deviation[t] > 0.0 {
                let u = add(&mut out, &mut tags, 0.0, 1.0, 0.0, DualTag::Indicator(Uncertain::SolarDown { hour: t, unit: s }));
                binaries.push(u);
                indicators.push((u, Uncertain::SolarDown { hour: t, unit: s }));
                uncertain[blk.solar[s]] = Some((-sp.deviation[t], u));
            }
        }

        let mut var_tag = vec![None; p.num_vars()];
        for &(j, tag) in &blk.vars {
            var_tag[j] = Some(tag);
        }
        let mut row_tag = vec![None; p.num_rows()];
        for &(r, tag) in &blk.rows {
            row_tag[r] = Some(tag);
        }

        // Column view of the primal rows.
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.num_vars()];
        for (i, row) in p.rows.iter().enumerate() {
            let (lo, up) = match row.relation {
                Relation::Eq => (f64::NEG_INFINITY, f64::INFINITY),
                Relation::Ge => (0.0, f64::INFINITY),
                Relation::Le => (f64::NEG_INFINITY, 0.0),
            };
            let y = add(&mut out, &mut tags, lo, up, row.rhs, DualTag::Row(row_tag[i].expect("tagged row")));
            for &(j, a) in &row.coeffs {
                cols[j].push((y, a));
            }
        }

        for j in 0..p.num_vars() {
            let vt = var_tag[j].expect("tagged variable");
            let (lo, up) = (p.lower[j], p.upper[j]);
            let mut coeffs = cols[j].clone();
            let relation = if lo == 0.0 { Relation::Le } else { Relation::Eq };
            if lo.is_finite() && lo != 0.0 {
                let a = add(&mut out, &mut tags, 0.0, f64::INFINITY, lo, DualTag::Lower(vt));
                coeffs.push((a, 1.0));
            }
            if up.is_finite() {
                let b = add(&mut out, &mut tags, 0.0, f64::INFINITY, -up, DualTag::Upper(vt));
                coeffs.push((b, -1.0));
                if let Some((delta, u)) = uncertain[j] {
                    let phi = add(&mut out, &mut tags, 0.0, f64::INFINITY, -delta, DualTag::Phi(vt));
                    let psi = add(&mut out, &mut tags, 0.0, f64::INFINITY, 0.0, DualTag::Psi(vt));
                    out.add_row(vec![(b, 1.0), (phi, -1.0), (psi, -1.0)], Relation::Eq, 0.0);
                    row_tags.push(None);
                    out.add_row(vec![(phi, 1.0), (u, -big_m)], Relation::Le, 0.0);
                    row_tags.push(None);
                    out.add_row(vec![(psi, 1.0), (u, big_m)], Relation::Le, big_m);
                    row_tags.push(None);
                    products.push((b, phi, psi, u));
                }
            }
            out.add_row(coeffs, relation, p.objective[j]);
            row_tags.push(Some(vt));
        }
        out.objective_offset += p.objective_offset;
    }

    let budget_row = out.add_row(binaries.iter().map(|&u| (u, 1.0)).collect(), Relation::Le, budget as f64);
    row_tags.push(None);
    Ok(DualSubproblem {
        mip: MixedIntegerProgram::new(out, binaries),
        budget_row,
        tags,
        row_tags,
        indicators,
        products,
        big_m,
        line_status: line_status.to_vec(),
    })
}

/// Solves a built subproblem and re-prices the returned realization with
/// the primal second-stage LP.
pub fn solve_subproblem(case: &NetworkCase, sp: &DualSubproblem) -> Result<WorstCase, SolveError> {
    let sol = solve_milp_linked(&sp.mip, sp.budget_row, &MilpOptions::default())?;
    match sol.status {
        MilpStatus::Optimal => {}
        MilpStatus::Unbounded => {
            return Err(SolveError::Internal(
                "dual subproblem unbounded: some realization has no feasible dispatch".into(),
            ))
        }
        other => return Err(SolveError::Internal(format!("dual subproblem ended with {other:?}"))),
    }
    let t_n = case.horizon;
    let mut up = vec![vec![false; case.demands.len()]; t_n];
    let mut down = vec![vec![false; case.solar.len()]; t_n];
    for &(j, which) in &sp.indicators {
        if sol.x[j] > 0.5 {
            match which {
                Uncertain::DemandUp { hour, demand } => up[hour][demand] = true,
                Uncertain::SolarDown { hour, unit } => down[hour][unit] = true,
            }
        }
    }
    let realization = UncertaintyRealization::from_indicators(case, up, down);
    let dispatch = solve_recourse(case, &sp.line_status, &realization)?;
    Ok(WorstCase {
        realization,
        cost: dispatch.cost,
        dual_objective: sol.objective,
        dual: DualSolution {
            values: sp.tags.iter().copied().zip(sol.x.iter().copied()).collect(),
            objective: sol.objective,
        },
        dispatch,
        big_m: sp.big_m,
        x: sol.x,
    })
}

/// True when some linearized multiplier sits at the big-M cap.
pub fn hits_big_m(sp: &DualSubproblem, x: &[f64]) -> bool {
    sp.products
        .iter()
        .any(|&(b, _, _, _)| x[b] >= sp.big_m * (1.0 - 1e-9))
}

/// Worst-case realization for a line plan under the case budget; doubles the
/// linearization constant while it is binding.
pub fn worst_case(case: &NetworkCase, line_status: &[Vec<bool>]) -> Result<WorstCase, SolveError> {
    let mut m = case.params.big_m;
    for _ in 0..30 {
        let sp = build_with_m(case, line_status, case.params.budget, m)?;
        let wc = solve_subproblem(case, &sp)?;
        if !hits_big_m(&sp, &wc.x) {
            return Ok(wc);
        }
        m *= 2.0;
    }
    Err(SolveError::Internal("linearization constant kept binding".into()))
}
