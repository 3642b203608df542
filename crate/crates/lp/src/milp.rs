//! Branch-and-bound for linear programs with binary variables.
//!
//! The search dives depth-first (up branch first) and backtracks to the open
//! node with the smallest bound. Branching picks the most fractional binary,
//! lowest index on ties. Each node warm-starts the dual simplex from its
//! parent's basis after activity-based propagation has fixed what binaries it
//! can.

use std::collections::VecDeque;
use std::rc::Rc;

use crate::model::{LinearProgram, LpError, LpStatus, Relation, Sense};
use crate::simplex::{Basis, Prepared, SimplexOptions};

/// Values within this distance of 0 or 1 count as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    /// Indices of variables restricted to {0, 1}.
    pub binaries: Vec<usize>,
}

impl MixedIntegerProgram {
    pub fn new(lp: LinearProgram, binaries: Vec<usize>) -> Self {
        MixedIntegerProgram { lp, binaries }
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        let j = self.lp.add_named_var(name, 0.0, 1.0, cost);
        self.binaries.push(j);
        j
    }

    pub fn validate(&self) -> Result<(), LpError> {
        self.lp.validate()?;
        let mut seen = vec![false; self.lp.num_vars()];
        for &j in &self.binaries {
            if j >= seen.len() {
                return Err(LpError::InvalidModel(format!("binary index {j} out of range")));
            }
            if seen[j] {
                return Err(LpError::InvalidModel(format!("binary {} listed twice", self.lp.var_name(j))));
            }
            seen[j] = true;
            let (l, u) = (self.lp.lower[j], self.lp.upper[j]);
            if l < 0.0 || u > 1.0 {
                return Err(LpError::InvalidModel(format!(
                    "binary {} has bounds [{l}, {u}] outside [0, 1]",
                    self.lp.var_name(j)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpOptions {
    /// Relative optimality gap at which a node is pruned.
    pub gap: f64,
    /// Absolute optimality gap at which a node is pruned.
    pub abs_gap: f64,
    pub node_limit: usize,
    pub propagate: bool,
    pub simplex: SimplexOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            gap: 1e-9,
            abs_gap: 1e-9,
            node_limit: 1_000_000,
            propagate: true,
            simplex: SimplexOptions::default(),
        }
    }
}

impl MilpOptions {
    pub fn with_gap(gap: f64) -> Self {
        MilpOptions {
            gap,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MilpStatus {
    /// Incumbent proven optimal within the requested gap.
    Optimal,
    Infeasible,
    Unbounded,
    /// An incumbent exists but the search stopped before closing the gap.
    GapNotProven,
    /// The search stopped before any incumbent was found.
    NoSolution,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent values with binaries set exactly to 0 or 1; empty without
    /// an incumbent.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Best proven bound in the problem's own sense.
    pub best_bound: f64,
    /// `|objective − best_bound| / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    /// Global bound after each processed node, in minimization form.
    pub bound_history: Vec<f64>,
    /// Objective of each successive incumbent.
    pub incumbent_history: Vec<f64>,
}

impl MilpSolution {
    pub fn has_incumbent(&self) -> bool {
        !self.x.is_empty()
    }

    fn empty(status: MilpStatus, nodes: usize) -> Self {
        MilpSolution {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            best_bound: f64::NAN,
            gap: f64::INFINITY,
            nodes,
            lp_iterations: 0,
            bound_history: Vec::new(),
            incumbent_history: Vec::new(),
        }
    }
}

struct Node {
    id: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
    basis: Option<Rc<Basis>>,
}

/// Activity-based bound propagation that only ever fixes binaries.
struct Propagator {
    rows_of_var: Vec<Vec<usize>>,
    bin_rows: Vec<usize>,
}

impl Propagator {
    fn new(lp: &LinearProgram, is_bin: &[bool]) -> Self {
        let mut rows_of_var = vec![Vec::new(); lp.num_vars()];
        let mut bin_rows = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let mut has_bin = false;
            for &(j, _) in &row.coeffs {
                if rows_of_var[j].last() != Some(&i) {
                    rows_of_var[j].push(i);
                }
                has_bin |= is_bin[j];
            }
            if has_bin {
                bin_rows.push(i);
            }
        }
        Propagator { rows_of_var, bin_rows }
    }

    /// Returns false when some row cannot be satisfied within the bounds.
    fn run(
        &self,
        lp: &LinearProgram,
        is_bin: &[bool],
        seeds: &[usize],
        all: bool,
        lower: &mut [f64],
        upper: &mut [f64],
    ) -> bool {
        let m = lp.num_rows();
        let mut queued = vec![false; m];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let push = |i: usize, queue: &mut VecDeque<usize>, queued: &mut Vec<bool>| {
            if !queued[i] {
                queued[i] = true;
                queue.push_back(i);
            }
        };
        if all {
            for &i in &self.bin_rows {
                push(i, &mut queue, &mut queued);
            }
        } else {
            for &j in seeds {
                for &i in &self.rows_of_var[j] {
                    push(i, &mut queue, &mut queued);
                }
            }
        }
        let mut work = 0usize;
        let cap = 20 * (self.bin_rows.len() + 1);
        while let Some(i) = queue.pop_front() {
            queued[i] = false;
            work += 1;
            if work > cap {
                break;
            }
            let row = &lp.rows[i];
            let (mut lo_act, mut hi_act) = (0.0, 0.0);
            let (mut lo_inf, mut hi_inf) = (0usize, 0usize);
            for &(j, a) in &row.coeffs {
                let (l, u) = (lower[j], upper[j]);
                let (lo_c, hi_c) = if a >= 0.0 { (a * l, a * u) } else { (a * u, a * l) };
                if lo_c.is_finite() {
                    lo_act += lo_c;
                } else {
                    lo_inf += 1;
                }
                if hi_c.is_finite() {
                    hi_act += hi_c;
                } else {
                    hi_inf += 1;
                }
            }
            let tol = 1e-7 * (1.0 + row.rhs.abs());
            let le = matches!(row.relation, Relation::Le | Relation::Eq);
            let ge = matches!(row.relation, Relation::Ge | Relation::Eq);
            if le && lo_inf == 0 && lo_act > row.rhs + tol {
                return false;
            }
            if ge && hi_inf == 0 && hi_act < row.rhs - tol {
                return false;
            }
            for &(j, a) in &row.coeffs {
                if !is_bin[j] || lower[j] == upper[j] || a == 0.0 {
                    continue;
                }
                let mut fix: Option<f64> = None;
                if le && lo_inf == 0 && lo_act + a.abs() > row.rhs + tol {
                    fix = Some(if a > 0.0 { 0.0 } else { 1.0 });
                }
                if fix.is_none() && ge && hi_inf == 0 && hi_act - a.abs() < row.rhs - tol {
                    fix = Some(if a > 0.0 { 1.0 } else { 0.0 });
                }
                if let Some(v) = fix {
                    lower[j] = v;
                    upper[j] = v;
                    // Activity bounds shift with the fixing.
                    if a > 0.0 {
                        if v == 0.0 {
                            hi_act -= a;
                        } else {
                            lo_act += a;
                        }
                    } else if v == 0.0 {
                        lo_act -= a;
                    } else {
                        hi_act += a;
                    }
                    for &k in &self.rows_of_var[j] {
                        if k != i {
                            push(k, &mut queue, &mut queued);
                        }
                    }
                    if le && lo_inf == 0 && lo_act > row.rhs + tol {
                        return false;
                    }
                    if ge && hi_inf == 0 && hi_act < row.rhs - tol {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Solves `mip` by branch-and-bound.
pub fn solve_milp(mip: &MixedIntegerProgram, opts: &MilpOptions) -> Result<MilpSolution, LpError> {
    mip.validate()?;
    let lp = &mip.lp;
    let n = lp.num_vars();
    let sgn = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut is_bin = vec![false; n];
    for &j in &mip.binaries {
        is_bin[j] = true;
    }
    let mut root_lower = lp.lower.clone();
    let mut root_upper = lp.upper.clone();
    for &j in &mip.binaries {
        root_lower[j] = root_lower[j].ceil();
        root_upper[j] = root_upper[j].floor();
        if root_lower[j] > root_upper[j] {
            return Ok(MilpSolution::empty(MilpStatus::Infeasible, 0));
        }
    }
    let prop = Propagator::new(lp, &is_bin);
    if opts.propagate && !prop.run(lp, &is_bin, &[], true, &mut root_lower, &mut root_upper) {
        return Ok(MilpSolution::empty(MilpStatus::Infeasible, 0));
    }
    let prep = Prepared::new(lp);

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut incumbent_history = Vec::new();
    let mut bound_history = Vec::new();
    let mut open: Vec<Node> = Vec::new();
    let mut dive: Option<Node> = Some(Node {
        id: 0,
        bound: f64::NEG_INFINITY,
        fixings: Vec::new(),
        basis: None,
    });
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut unproven = false;
    let mut hit_limit = false;
    let mut last_bound = f64::NEG_INFINITY;
    let mut lower = root_lower.clone();
    let mut upper = root_upper.clone();

    let cutoff = |inc: &Option<(Vec<f64>, f64)>| -> f64 {
        match inc {
            Some((_, v)) => v - opts.abs_gap.max(opts.gap * v.abs()),
            None => f64::INFINITY,
        }
    };

    loop {
        let node = match dive.take() {
            Some(nd) => nd,
            None => {
                let mut best = None;
                for (k, nd) in open.iter().enumerate() {
                    let better = match best {
                        None => true,
                        Some(b) => {
                            let o: &Node = &open[b];
                            nd.bound < o.bound || (nd.bound == o.bound && nd.id < o.id)
                        }
                    };
                    if better {
                        best = Some(k);
                    }
                }
                match best {
                    Some(k) => open.swap_remove(k),
                    None => break,
                }
            }
        };
        if node.bound >= cutoff(&incumbent) {
            continue;
        }
        if nodes >= opts.node_limit {
            open.push(node);
            hit_limit = true;
            break;
        }
        nodes += 1;

        lower.copy_from_slice(&root_lower);
        upper.copy_from_slice(&root_upper);
        let mut seeds = Vec::with_capacity(node.fixings.len());
        for &(j, v) in &node.fixings {
            lower[j] = v;
            upper[j] = v;
            seeds.push(j);
        }
        let feasible =
            !opts.propagate || prop.run(lp, &is_bin, &seeds, false, &mut lower, &mut upper);
        let mut children: Option<(usize, f64, Rc<Basis>)> = None;
        if feasible {
            let mut sol = prep.solve(&lower, &upper, &opts.simplex, node.basis.as_deref());
            if matches!(sol.status, LpStatus::NumericalFailure | LpStatus::IterationLimit)
                && node.basis.is_some()
            {
                lp_iterations += sol.iterations;
                sol = prep.solve(&lower, &upper, &opts.simplex, None);
            }
            lp_iterations += sol.iterations;
            match sol.status {
                LpStatus::Optimal => {
                    let value = (sgn * sol.objective).max(node.bound);
                    if value < cutoff(&incumbent) {
                        let mut branch: Option<(usize, f64)> = None;
                        for &j in &mip.binaries {
                            let f = (sol.x[j] - sol.x[j].round()).abs();
                            if f > INTEGRALITY_TOL && branch.is_none_or(|(_, bf)| f > bf) {
                                branch = Some((j, f));
                            }
                        }
                        match branch {
                            Some((j, _)) => {
                                let basis = Rc::new(sol.basis.clone().expect("optimal solve has basis"));
                                children = Some((j, value, basis));
                            }
                            None => {
                                let cand = polish(&prep, mip, &sol.x, &lower, &upper, opts, &mut lp_iterations);
                                if let Some((x, obj)) = cand {
                                    let v = sgn * obj;
                                    if incumbent.as_ref().is_none_or(|(_, best)| v < *best) {
                                        incumbent = Some((x, v));
                                        incumbent_history.push(obj);
                                    }
                                } else {
                                    unproven = true;
                                }
                            }
                        }
                    }
                }
                LpStatus::Infeasible => {}
                LpStatus::Unbounded => {
                    if nodes == 1 {
                        let mut s = MilpSolution::empty(MilpStatus::Unbounded, nodes);
                        s.lp_iterations = lp_iterations;
                        return Ok(s);
                    }
                    unproven = true;
                }
                LpStatus::NumericalFailure | LpStatus::IterationLimit => {
                    if nodes == 1 {
                        let mut s = MilpSolution::empty(MilpStatus::NumericalFailure, nodes);
                        s.lp_iterations = lp_iterations;
                        return Ok(s);
                    }
                    unproven = true;
                }
            }
        }
        if let Some((j, value, basis)) = children {
            let mut up = node.fixings.clone();
            up.push((j, 1.0));
            let mut down = node.fixings;
            down.push((j, 0.0));
            open.push(Node {
                id: next_id + 1,
                bound: value,
                fixings: down,
                basis: Some(basis.clone()),
            });
            dive = Some(Node {
                id: next_id,
                bound: value,
                fixings: up,
                basis: Some(basis),
            });
            next_id += 2;
        }
        let cut = cutoff(&incumbent);
        open.retain(|nd| nd.bound < cut);
        let mut global = incumbent.as_ref().map_or(f64::INFINITY, |(_, v)| *v);
        for nd in open.iter().chain(dive.iter()) {
            global = global.min(nd.bound);
        }
        if global.is_finite() {
            last_bound = global;
        }
        bound_history.push(last_bound);
    }

    let remaining = open
        .iter()
        .chain(dive.iter())
        .map(|nd| nd.bound)
        .fold(f64::INFINITY, f64::min);
    let status;
    let mut out = match incumbent {
        Some((x, v)) => {
            let bound = remaining.min(v);
            status = if hit_limit || unproven {
                MilpStatus::GapNotProven
            } else {
                MilpStatus::Optimal
            };
            let mut s = MilpSolution::empty(status, nodes);
            s.objective = sgn * v;
            s.best_bound = sgn * bound;
            s.gap = if bound.is_finite() { (v - bound).abs() / v.abs().max(1.0) } else { f64::INFINITY };
            s.x = x;
            s
        }
        None => {
            status = if hit_limit || unproven {
                MilpStatus::NoSolution
            } else {
                MilpStatus::Infeasible
            };
            let mut s = MilpSolution::empty(status, nodes);
            s.best_bound = sgn * remaining;
            s
        }
    };
    out.lp_iterations = lp_iterations;
    out.bound_history = bound_history;
    out.incumbent_history = incumbent_history;
    Ok(out)
}

/// Fixes binaries at their rounded values and re-solves, so the incumbent
/// is exactly integral and its continuous part optimal.
fn polish(
    prep: &Prepared,
    mip: &MixedIntegerProgram,
    x: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &MilpOptions,
    iterations: &mut usize,
) -> Option<(Vec<f64>, f64)> {
    let mut lo = lower.to_vec();
    let mut up = upper.to_vec();
    for &j in &mip.binaries {
        let v = x[j].round();
        lo[j] = v;
        up[j] = v;
    }
    let sol = prep.solve(&lo, &up, &opts.simplex, None);
    *iterations += sol.iterations;
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let mut xs = sol.x;
    for &j in &mip.binaries {
        xs[j] = xs[j].round();
    }
    if mip.lp.primal_residual(&xs) > 1e-6 {
        return None;
    }
    let obj = mip.lp.objective_value(&xs);
    Some((xs, obj))
}

/// Solves a program whose rows split into independent blocks once one
/// linking row `Σ_{j∈S} x_j ≤ E` over binaries is set aside.
///
/// Each block is solved for every admissible share `k` of the budget and
/// the shares are combined by dynamic programming, which is exact. Falls back
/// to [`solve_milp`] when `link_row` does not have that shape.
pub fn solve_milp_linked(
    mip: &MixedIntegerProgram,
    link_row: usize,
    opts: &MilpOptions,
) -> Result<MilpSolution, LpError> {
    mip.validate()?;
    let lp = &mip.lp;
    let n = lp.num_vars();
    let Some(link) = lp.rows.get(link_row) else {
        return Err(LpError::InvalidModel(format!("link row {link_row} out of range")));
    };
    let mut is_bin = vec![false; n];
    for &j in &mip.binaries {
        is_bin[j] = true;
    }
    let shape_ok = link.relation == Relation::Le
        && link.rhs >= 0.0
        && link.coeffs.iter().all(|&(j, a)| a == 1.0 && is_bin[j]);
    if !shape_ok {
        return solve_milp(mip, opts);
    }
    let budget = (link.rhs + 1e-9).floor() as usize;

    // Union-find over variables joined by any other row.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for (i, row) in lp.rows.iter().enumerate() {
        if i == link_row || row.coeffs.is_empty() {
            continue;
        }
        let first = row.coeffs[0].0;
        for &(j, _) in &row.coeffs[1..] {
            let r0 = find(&mut parent, first);
            let r = find(&mut parent, j);
            if r != r0 {
                let (a, b) = if r < r0 { (r, r0) } else { (r0, r) };
                parent[b] = a;
            }
        }
    }
    let mut comp_of = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut root_comp = vec![usize::MAX; n];
    for j in 0..n {
        let r = find(&mut parent, j);
        if root_comp[r] == usize::MAX {
            root_comp[r] = comps.len();
            comps.push(Vec::new());
        }
        comp_of[j] = root_comp[r];
        comps[root_comp[r]].push(j);
    }
    let mut comp_rows: Vec<Vec<usize>> = vec![Vec::new(); comps.len()];
    for (i, row) in lp.rows.iter().enumerate() {
        if i == link_row {
            continue;
        }
        match row.coeffs.first() {
            Some(&(j, _)) => comp_rows[comp_of[j]].push(i),
            None => {
                if row.violation(&[]) > 1e-9 {
                    return Ok(MilpSolution::empty(MilpStatus::Infeasible, 0));
                }
            }
        }
    }
    let mut in_link = vec![false; n];
    for &(j, _) in &link.coeffs {
        in_link[j] = true;
    }

    let sgn = match lp.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    let mut nodes = 0;
    let mut lp_iterations = 0;
    let mut proven = true;
    let mut worst_gap: f64 = 0.0;
    // Per component: value (min form) and solution for each share k.
    let mut tables: Vec<Vec<Option<(f64, Vec<f64>)>>> = Vec::with_capacity(comps.len());
    for (c, vars) in comps.iter().enumerate() {
        let mut local = vec![usize::MAX; n];
        for (k, &j) in vars.iter().enumerate() {
            local[j] = k;
        }
        let mut sub = LinearProgram::new(Sense::Min);
        for &j in vars {
            sub.add_var(lp.lower[j], lp.upper[j], sgn * lp.objective[j]);
        }
        for &i in &comp_rows[c] {
            let row = &lp.rows[i];
            sub.add_row(
                row.coeffs.iter().map(|&(j, a)| (local[j], a)).collect(),
                row.relation,
                row.rhs,
            );
        }
        let sub_bins: Vec<usize> = vars.iter().filter(|&&j| is_bin[j]).map(|&j| local[j]).collect();
        let links: Vec<usize> = vars.iter().filter(|&&j| in_link[j]).map(|&j| local[j]).collect();
        let kmax = links.len().min(budget);
        let mut table: Vec<Option<(f64, Vec<f64>)>> = vec![None; kmax + 1];
        let mut solve_k = |k: usize, table: &mut Vec<Option<(f64, Vec<f64>)>>| -> Result<Option<usize>, LpError> {
            let mut s = MixedIntegerProgram::new(sub.clone(), sub_bins.clone());
            if !links.is_empty() {
                s.lp.add_row(links.iter().map(|&j| (j, 1.0)).collect(), Relation::Le, k as f64);
            }
            let r = solve_milp(&s, opts)?;
            nodes += r.nodes;
            lp_iterations += r.lp_iterations;
            match r.status {
                MilpStatus::Optimal | MilpStatus::GapNotProven => {
                    if r.status == MilpStatus::GapNotProven {
                        proven = false;
                    }
                    worst_gap = worst_gap.max(r.gap);
                    let used = links.iter().filter(|&&j| r.x[j] > 0.5).count();
                    table[k] = Some((r.objective, r.x));
                    Ok(Some(used))
                }
                MilpStatus::Infeasible => Ok(None),
                MilpStatus::Unbounded => Err(LpError::NotOptimal(LpStatus::Unbounded)),
                MilpStatus::NoSolution => {
                    proven = false;
                    Ok(None)
                }
                MilpStatus::NumericalFailure => Err(LpError::NotOptimal(LpStatus::NumericalFailure)),
            }
        };
        let unbounded = |e: &LpError| matches!(e, LpError::NotOptimal(LpStatus::Unbounded));
        let top = match solve_k(kmax, &mut table) {
            Ok(v) => v,
            Err(e) if unbounded(&e) => return Ok(MilpSolution::empty(MilpStatus::Unbounded, nodes)),
            Err(e) => return Err(e),
        };
        if let Some(used) = top {
            let entry = table[kmax].clone();
            for k in used..kmax {
                table[k] = entry.clone();
            }
            for k in 0..used.min(kmax) {
                solve_k(k, &mut table)?;
            }
        }
        tables.push(table);
    }

    // Knapsack over budget shares, minimization form.
    let mut best = vec![f64::INFINITY; budget + 1];
    best[0] = 0.0;
    let mut choice: Vec<Vec<usize>> = Vec::with_capacity(tables.len());
    for table in &tables {
        let mut next = vec![f64::INFINITY; budget + 1];
        let mut pick = vec![usize::MAX; budget + 1];
        for used in 0..=budget {
            if best[used].is_infinite() {
                continue;
            }
            for (k, entry) in table.iter().enumerate() {
                if used + k > budget {
                    break;
                }
                if let Some((v, _)) = entry {
                    let total = best[used] + v;
                    if total < next[used + k] {
                        next[used + k] = total;
                        pick[used + k] = k;
                    }
                }
            }
        }
        best = next;
        choice.push(pick);
    }
    let mut end = usize::MAX;
    for (b, &v) in best.iter().enumerate() {
        if v.is_finite() && (end == usize::MAX || v < best[end]) {
            end = b;
        }
    }
    if end == usize::MAX {
        let mut s = MilpSolution::empty(
            if proven { MilpStatus::Infeasible } else { MilpStatus::NoSolution },
            nodes,
        );
        s.lp_iterations = lp_iterations;
        return Ok(s);
    }
    // Walk back through the DP; each layer's pick is relative to its own total.
    let mut x = vec![0.0; n];
    let mut used = end;
    for c in (0..tables.len()).rev() {
        let k = choice[c][used];
        let (_, sol) = tables[c][k].as_ref().expect("chosen share was solved");
        for (li, &j) in comps[c].iter().enumerate() {
            x[j] = sol[li];
        }
        used -= k;
    }
    let objective = lp.objective_value(&x);
    let mut s = MilpSolution::empty(
        if proven { MilpStatus::Optimal } else { MilpStatus::GapNotProven },
        nodes,
    );
    s.objective = objective;
    s.best_bound = objective;
    s.gap = worst_gap;
    s.x = x;
    s.lp_iterations = lp_iterations;
    s.incumbent_history = vec![objective];
    Ok(s)
}
