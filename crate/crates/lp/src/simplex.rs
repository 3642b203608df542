//! Bounded-variable revised simplex.
//!
//! Every row `a_i·x (rel) b_i` becomes `a_i·x − s_i = 0` with a logical
//! variable `s_i` whose bounds encode the relation. Structural variables are
//! `0..n`, logicals `n..n+m`. The problem is scaled, converted to minimization,
//! and solved either by the primal simplex (composite phase 1) or, from a warm
//! dual-feasible basis, by the dual simplex.

use crate::lu::{BasisColumns, Factor};
use crate::model::{LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense};
use crate::scaling::equilibrate;
use crate::{FEAS_TOL, OPT_TOL, PIVOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

/// Final basis of a solve, reusable as a warm start for a problem with the
/// same rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    pub(crate) head: Vec<usize>,
    pub(crate) state: Vec<VarState>,
}

impl Basis {
    /// Indices (structural `0..n`, logical `n..n+m`) of the basic variables.
    pub fn basic_variables(&self) -> &[usize] {
        &self.head
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    /// Iteration cap; 0 picks a size-dependent default.
    pub max_iterations: usize,
    /// Pivots without objective progress before switching to Bland's rule.
    pub stall_threshold: usize,
    /// Eta columns accumulated before the basis is refactorized.
    pub refactor_interval: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iterations: 0,
            stall_threshold: 50,
            refactor_interval: 100,
        }
    }
}

/// Solves `lp` from a cold start.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &SimplexOptions::default(), None)
}

/// Solves `lp`, optionally starting from a basis of an earlier solve of a
/// problem with identical shape.
pub fn solve_lp_with(
    lp: &LinearProgram,
    opts: &SimplexOptions,
    warm: Option<&Basis>,
) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let prep = Prepared::new(lp);
    Ok(prep.solve(&lp.lower, &lp.upper, opts, warm))
}

/// Scaled, minimization-form copy of a linear program.
pub(crate) struct Prepared {
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    cost: Vec<f64>,
    row_lower: Vec<f64>,
    row_upper: Vec<f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
    sign: f64,
    offset: f64,
    orig_cost: Vec<f64>,
    relations: Vec<Relation>,
}

impl Prepared {
    pub(crate) fn new(lp: &LinearProgram) -> Prepared {
        let n = lp.num_vars();
        let m = lp.num_rows();
        // Merge duplicate entries and drop zeros, then build CSC.
        let mut count = vec![0usize; n + 1];
        let mut merged: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
        for row in &lp.rows {
            let mut c: Vec<(usize, f64)> = row.coeffs.clone();
            c.sort_by_key(|e| e.0);
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(c.len());
            for (j, a) in c {
                match out.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => out.push((j, a)),
                }
            }
            out.retain(|e| e.1 != 0.0);
            for &(j, _) in &out {
                count[j + 1] += 1;
            }
            merged.push(out);
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let nnz = count[n];
        let col_start = count.clone();
        let mut fill = count;
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, row) in merged.iter().enumerate() {
            for &(j, a) in row {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }
        let sc = equilibrate(m, n, &col_start, &col_row, &col_val);
        for j in 0..n {
            for e in col_start[j]..col_start[j + 1] {
                col_val[e] *= sc.row[col_row[e]] * sc.col[j];
            }
        }
        let mut row_start = vec![0usize; m + 1];
        for (i, row) in merged.iter().enumerate() {
            row_start[i + 1] = row_start[i] + row.len();
        }
        let mut row_col = Vec::with_capacity(nnz);
        let mut row_val = Vec::with_capacity(nnz);
        for (i, row) in merged.iter().enumerate() {
            for &(j, a) in row {
                row_col.push(j);
                row_val.push(a * sc.row[i] * sc.col[j]);
            }
        }
        let sign = match lp.sense {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        };
        let mut cost = vec![0.0; n + m];
        for j in 0..n {
            cost[j] = sign * lp.objective[j] * sc.col[j];
        }
        let mut row_lower = vec![0.0; m];
        let mut row_upper = vec![0.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let b = row.rhs * sc.row[i];
            let (l, u) = match row.relation {
                Relation::Le => (f64::NEG_INFINITY, b),
                Relation::Ge => (b, f64::INFINITY),
                Relation::Eq => (b, b),
            };
            row_lower[i] = l;
            row_upper[i] = u;
        }
        Prepared {
            n,
            m,
            col_start,
            col_row,
            col_val,
            row_start,
            row_col,
            row_val,
            cost,
            row_lower,
            row_upper,
            row_scale: sc.row,
            col_scale: sc.col,
            sign,
            offset: lp.objective_offset,
            orig_cost: lp.objective.clone(),
            relations: lp.rows.iter().map(|r| r.relation).collect(),
        }
    }

    /// Solves with the structural bounds replaced by `lower`/`upper`
    /// (original units).
    pub(crate) fn solve(
        &self,
        lower: &[f64],
        upper: &[f64],
        opts: &SimplexOptions,
        warm: Option<&Basis>,
    ) -> LpSolution {
        let (n, m) = (self.n, self.m);
        let mut lo = Vec::with_capacity(n + m);
        let mut up = Vec::with_capacity(n + m);
        for j in 0..n {
            lo.push(lower[j] / self.col_scale[j]);
            up.push(upper[j] / self.col_scale[j]);
        }
        lo.extend_from_slice(&self.row_lower);
        up.extend_from_slice(&self.row_upper);
        if (0..n + m).any(|j| lo[j] > up[j] + FEAS_TOL) {
            // Crossed bounds (possible after branching): trivially infeasible.
            let mut sol = LpSolution::without_solution(LpStatus::Infeasible, n, m, 0);
            sol.farkas = Some(vec![0.0; m]);
            return sol;
        }
        for j in 0..n + m {
            if lo[j] > up[j] {
                let mid = 0.5 * (lo[j] + up[j]);
                lo[j] = mid;
                up[j] = mid;
            }
        }
        let max_iter = if opts.max_iterations == 0 {
            20_000 + 50 * (n + m)
        } else {
            opts.max_iterations
        };
        let mut s = Solver::new(self, lo, up, opts.clone(), max_iter);
        let status = s.run(warm);
        s.finish(status)
    }
}

const NONE: usize = usize::MAX;

struct Solver<'a> {
    p: &'a Prepared,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    state: Vec<VarState>,
    pos: Vec<usize>,
    factor: Option<Factor>,
    cols: BasisColumns,
    opts: SimplexOptions,
    max_iter: usize,
    iterations: usize,
    ray: Option<Vec<f64>>,
    /// Scratch vectors of length m.
    w1: Vec<f64>,
    w2: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    Numerical,
    Limit,
    /// Dual simplex gave up; continue with the primal.
    Fallback,
}

impl<'a> Solver<'a> {
    fn new(p: &'a Prepared, lo: Vec<f64>, up: Vec<f64>, opts: SimplexOptions, max_iter: usize) -> Self {
        let (n, m) = (p.n, p.m);
        Solver {
            p,
            lo,
            up,
            x: vec![0.0; n + m],
            head: Vec::new(),
            state: vec![VarState::Lower; n + m],
            pos: vec![NONE; n + m],
            factor: None,
            cols: BasisColumns::with_capacity(m),
            opts,
            max_iter,
            iterations: 0,
            ray: None,
            w1: vec![0.0; m],
            w2: vec![0.0; m],
            y: vec![0.0; m],
            d: vec![0.0; n + m],
        }
    }

    fn nonbasic_state(&self, j: usize) -> VarState {
        if self.lo[j].is_finite() {
            VarState::Lower
        } else if self.up[j].is_finite() {
            VarState::Upper
        } else {
            VarState::Zero
        }
    }

    /// Moves a nonbasic variable onto the bound its state names, fixing the
    /// state when that bound is infinite.
    fn place_nonbasic(&mut self, j: usize) {
        let st = match self.state[j] {
            VarState::Lower if self.lo[j].is_finite() => VarState::Lower,
            VarState::Upper if self.up[j].is_finite() => VarState::Upper,
            VarState::Zero if !self.lo[j].is_finite() && !self.up[j].is_finite() => VarState::Zero,
            _ => self.nonbasic_state(j),
        };
        self.state[j] = st;
        self.x[j] = match st {
            VarState::Lower => self.lo[j],
            VarState::Upper => self.up[j],
            _ => 0.0,
        };
    }

    fn install_basis(&mut self, warm: Option<&Basis>) {
        let (n, m) = (self.p.n, self.p.m);
        let usable = warm.filter(|b| {
            b.head.len() == m
                && b.state.len() == n + m
                && b.head.iter().all(|&j| j < n + m && b.state[j] == VarState::Basic)
                && b.state.iter().filter(|s| **s == VarState::Basic).count() == m
        });
        match usable {
            Some(b) => {
                self.head = b.head.clone();
                self.state = b.state.clone();
            }
            None => {
                self.head = (n..n + m).collect();
                for j in 0..n {
                    self.state[j] = VarState::Lower;
                }
                for j in n..n + m {
                    self.state[j] = VarState::Basic;
                }
            }
        }
        self.pos.iter_mut().for_each(|p| *p = NONE);
        for (k, &j) in self.head.iter().enumerate() {
            self.pos[j] = k;
        }
        for j in 0..n + m {
            if self.state[j] != VarState::Basic {
                self.place_nonbasic(j);
            }
        }
    }

    fn dot_col(&self, j: usize, v: &[f64]) -> f64 {
        let p = self.p;
        if j < p.n {
            let mut s = 0.0;
            for e in p.col_start[j]..p.col_start[j + 1] {
                s += p.col_val[e] * v[p.col_row[e]];
            }
            s
        } else {
            -v[j - p.n]
        }
    }

    fn scatter_col(&self, j: usize, out: &mut [f64], scale: f64) {
        let p = self.p;
        if j < p.n {
            for e in p.col_start[j]..p.col_start[j + 1] {
                out[p.col_row[e]] += scale * p.col_val[e];
            }
        } else {
            out[j - p.n] -= scale;
        }
    }

    /// Factorizes the current basis, swapping in logicals for dependent
    /// columns. Returns false when the basis cannot be repaired.
    fn refactor(&mut self) -> bool {
        let (n, m) = (self.p.n, self.p.m);
        for _attempt in 0..4 {
            self.cols.clear();
            for k in 0..m {
                let j = self.head[k];
                if j < n {
                    let (a, b) = (self.p.col_start[j], self.p.col_start[j + 1]);
                    self.cols.push(&self.p.col_row[a..b], &self.p.col_val[a..b]);
                } else {
                    self.cols.push_single(j - n, -1.0);
                }
            }
            match Factor::factorize(m, &self.cols) {
                Ok(f) => {
                    self.factor = Some(f);
                    self.compute_xb();
                    return true;
                }
                Err(sing) => {
                    for (&k, &r) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.head[k];
                        self.state[old] = if self.x[old] - self.lo[old] <= self.up[old] - self.x[old] {
                            VarState::Lower
                        } else {
                            VarState::Upper
                        };
                        self.pos[old] = NONE;
                        self.place_nonbasic(old);
                        let logical = n + r;
                        self.head[k] = logical;
                        self.state[logical] = VarState::Basic;
                        self.pos[logical] = k;
                    }
                }
            }
        }
        false
    }

    fn needs_refactor(&self) -> bool {
        let f = self.factor.as_ref().unwrap();
        f.num_etas() >= self.opts.refactor_interval || f.eta_nnz() > 8 * self.p.m + 4096
    }

    fn compute_xb(&mut self) {
        let m = self.p.m;
        let mut rhs = std::mem::take(&mut self.w1);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.p.n + m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                self.scatter_col(j, &mut rhs, -self.x[j]);
            }
        }
        self.factor.as_mut().unwrap().ftran(&mut rhs);
        for k in 0..m {
            self.x[self.head[k]] = rhs[k];
        }
        self.w1 = rhs;
    }

    /// Row duals for the cost vector `cost` restricted to basic variables,
    /// followed by reduced costs of every variable.
    fn compute_duals(&mut self, cost: &[f64]) {
        let m = self.p.m;
        for k in 0..m {
            self.y[k] = cost[self.head[k]];
        }
        self.factor.as_mut().unwrap().btran(&mut self.y);
        for j in 0..self.p.n + m {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                cost[j] - self.dot_col(j, &self.y)
            };
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.lo[j] - FEAS_TOL {
            self.lo[j] - x
        } else if x > self.up[j] + FEAS_TOL {
            x - self.up[j]
        } else {
            0.0
        }
    }

    fn run(&mut self, warm: Option<&Basis>) -> Outcome {
        self.install_basis(warm);
        if !self.refactor() {
            return Outcome::Numerical;
        }
        if warm.is_some() {
            match self.dual_simplex() {
                Outcome::Fallback => {}
                Outcome::Optimal => {}
                other => return other,
            }
        }
        let mut rounds = 0;
        loop {
            let out = self.primal_simplex();
            match out {
                Outcome::Optimal => {
                    // Confirm on a fresh factorization.
                    if !self.refactor() {
                        return Outcome::Numerical;
                    }
                    let clean = (0..self.p.m).all(|k| self.infeasibility(self.head[k]) == 0.0);
                    if clean || rounds >= 3 {
                        return if clean { Outcome::Optimal } else { Outcome::Numerical };
                    }
                    rounds += 1;
                }
                other => return other,
            }
        }
    }

    fn pricing(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.p.n + self.p.m {
            let dir = match self.state[j] {
                VarState::Basic => continue,
                _ if self.lo[j] == self.up[j] => continue,
                VarState::Lower if self.d[j] < -OPT_TOL => 1.0,
                VarState::Upper if self.d[j] > OPT_TOL => -1.0,
                VarState::Zero if self.d[j].abs() > OPT_TOL => -self.d[j].signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = self.d[j].abs();
            if score > best_score {
                best_score = score;
                best = Some((j, dir));
            }
        }
        best
    }

    fn primal_simplex(&mut self) -> Outcome {
        let (n, m) = (self.p.n, self.p.m);
        let mut phase_cost = vec![0.0; n + m];
        let mut bland = false;
        let mut best_obj = f64::INFINITY;
        let mut since_improve = 0usize;
        let mut last_phase1 = true;
        let mut retried = false;
        loop {
            if self.iterations >= self.max_iter {
                return Outcome::Limit;
            }
            if self.needs_refactor() && !self.refactor()
            {
                return Outcome::Numerical;
            }
            let mut phase1 = false;
            let mut obj = 0.0;
            for j in 0..n + m {
                phase_cost[j] = 0.0;
            }
            for k in 0..m {
                let j = self.head[k];
                let x = self.x[j];
                if x < self.lo[j] - FEAS_TOL {
                    phase_cost[j] = -1.0;
                    obj += self.lo[j] - x;
                    phase1 = true;
                } else if x > self.up[j] + FEAS_TOL {
                    phase_cost[j] = 1.0;
                    obj += x - self.up[j];
                    phase1 = true;
                }
            }
            if !phase1 {
                phase_cost.copy_from_slice(&self.p.cost);
                obj = (0..n).map(|j| self.p.cost[j] * self.x[j]).sum();
            }
            if phase1 != last_phase1 {
                best_obj = f64::INFINITY;
                since_improve = 0;
                bland = false;
                last_phase1 = phase1;
            }
            if obj < best_obj - 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                since_improve = 0;
                bland = false;
            } else {
                since_improve += 1;
                if since_improve > self.opts.stall_threshold {
                    bland = true;
                }
            }
            self.compute_duals(&phase_cost);
            let Some((q, dir)) = self.pricing(bland) else {
                if phase1 {
                    self.ray = Some(self.y.clone());
                    return Outcome::Infeasible;
                }
                return Outcome::Optimal;
            };
            let mut alpha = std::mem::take(&mut self.w2);
            alpha.iter_mut().for_each(|v| *v = 0.0);
            self.scatter_col(q, &mut alpha, 1.0);
            self.factor.as_mut().unwrap().ftran(&mut alpha);

            let step = self.primal_ratio(&alpha, q, dir, bland);
            self.iterations += 1;
            match step {
                Step::Unbounded => {
                    self.w2 = alpha;
                    if phase1 || !retried {
                        if retried {
                            return Outcome::Numerical;
                        }
                        retried = true;
                        if !self.refactor() {
                            return Outcome::Numerical;
                        }
                        continue;
                    }
                    return Outcome::Unbounded;
                }
                Step::Flip(t) => {
                    self.x[q] += dir * t;
                    for k in 0..m {
                        if alpha[k] != 0.0 {
                            self.x[self.head[k]] -= dir * t * alpha[k];
                        }
                    }
                    self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
                    self.place_nonbasic(q);
                }
                Step::Pivot { r, t, to_upper } => {
                    if alpha[r].abs() < PIVOT_TOL {
                        self.w2 = alpha;
                        if !self.refactor() {
                            return Outcome::Numerical;
                        }
                        continue;
                    }
                    self.x[q] += dir * t;
                    for k in 0..m {
                        if alpha[k] != 0.0 {
                            self.x[self.head[k]] -= dir * t * alpha[k];
                        }
                    }
                    let leave = self.head[r];
                    self.state[leave] = if to_upper { VarState::Upper } else { VarState::Lower };
                    self.pos[leave] = NONE;
                    self.place_nonbasic(leave);
                    self.head[r] = q;
                    self.state[q] = VarState::Basic;
                    self.pos[q] = r;
                    self.factor.as_mut().unwrap().push_eta(r, &alpha);
                }
            }
            retried = false;
            self.w2 = alpha;
        }
    }

    fn primal_ratio(&self, alpha: &[f64], q: usize, dir: f64, bland: bool) -> Step {
        let m = self.p.m;
        let flip = self.up[q] - self.lo[q];
        let tol = if bland { 0.0 } else { FEAS_TOL };
        // Candidates: (position, gap, |delta|, blocks at upper)
        let mut tmax = f64::INFINITY;
        let cand = |k: usize| -> Option<(f64, f64, bool)> {
            let a = alpha[k];
            if a.abs() < PIVOT_TOL {
                return None;
            }
            let j = self.head[k];
            let delta = -dir * a;
            let (x, l, u) = (self.x[j], self.lo[j], self.up[j]);
            if x < l - FEAS_TOL {
                (delta > 0.0).then_some((l - x, delta, false))
            } else if x > u + FEAS_TOL {
                (delta < 0.0).then_some((x - u, -delta, true))
            } else if delta < 0.0 {
                l.is_finite().then_some(((x - l).max(0.0), -delta, false))
            } else {
                u.is_finite().then_some(((u - x).max(0.0), delta, true))
            }
        };
        for k in 0..m {
            if let Some((gap, mag, _)) = cand(k) {
                tmax = tmax.min((gap + tol) / mag);
            }
        }
        if tmax.is_infinite() && flip.is_infinite() {
            return Step::Unbounded;
        }
        let mut chosen: Option<(usize, f64, f64, bool)> = None;
        for k in 0..m {
            if let Some((gap, mag, to_upper)) = cand(k) {
                let ratio = gap / mag;
                if ratio > tmax {
                    continue;
                }
                let better = match chosen {
                    None => true,
                    Some((ck, cr, cm, _)) => {
                        if bland {
                            ratio < cr || (ratio == cr && self.head[k] < self.head[ck])
                        } else {
                            mag > cm || (mag == cm && self.head[k] < self.head[ck])
                        }
                    }
                };
                if better {
                    chosen = Some((k, ratio, mag, to_upper));
                }
            }
        }
        match chosen {
            Some((r, ratio, _, to_upper)) => {
                if flip <= ratio {
                    Step::Flip(flip)
                } else {
                    Step::Pivot { r, t: ratio.max(0.0), to_upper }
                }
            }
            None => Step::Flip(flip),
        }
    }

    fn dual_simplex(&mut self) -> Outcome {
        let (n, m) = (self.p.n, self.p.m);
        let cost = self.p.cost.clone();
        self.compute_duals(&cost);
        // Boxed variables on the wrong side are flipped; anything else that
        // is dual infeasible sends us to the primal.
        let mut flipped = false;
        for j in 0..n + m {
            let st = self.state[j];
            if st == VarState::Basic || self.lo[j] == self.up[j] {
                continue;
            }
            let dj = self.d[j];
            let bad = match st {
                VarState::Lower => dj < -OPT_TOL,
                VarState::Upper => dj > OPT_TOL,
                VarState::Zero => dj.abs() > OPT_TOL,
                VarState::Basic => false,
            };
            if bad {
                if self.lo[j].is_finite() && self.up[j].is_finite() {
                    self.state[j] = if st == VarState::Lower { VarState::Upper } else { VarState::Lower };
                    self.place_nonbasic(j);
                    flipped = true;
                } else {
                    return Outcome::Fallback;
                }
            }
        }
        if flipped {
            self.compute_xb();
        }
        let mut row = vec![0.0; n + m];
        let mut budget = 0usize;
        loop {
            if self.iterations >= self.max_iter {
                return Outcome::Limit;
            }
            if budget > 50 * (m + 10) {
                return Outcome::Fallback;
            }
            if self.needs_refactor() && !self.refactor()
            {
                return Outcome::Numerical;
            }
            // Leaving row: largest bound violation.
            let mut r = NONE;
            let mut worst = 0.0;
            for k in 0..m {
                let v = self.infeasibility(self.head[k]);
                if v > worst {
                    worst = v;
                    r = k;
                }
            }
            if r == NONE {
                return Outcome::Optimal;
            }
            let leave = self.head[r];
            let below = self.x[leave] < self.lo[leave];
            self.compute_duals(&cost);
            let mut rho = std::mem::take(&mut self.w1);
            rho.iter_mut().for_each(|v| *v = 0.0);
            rho[r] = 1.0;
            self.factor.as_mut().unwrap().btran(&mut rho);
            let sparse = rho.iter().filter(|v| **v != 0.0).count() * 10 < m;
            if sparse {
                for j in 0..n + m {
                    row[j] = 0.0;
                }
                for i in 0..m {
                    let ri = rho[i];
                    if ri == 0.0 {
                        continue;
                    }
                    for e in self.p.row_start[i]..self.p.row_start[i + 1] {
                        row[self.p.row_col[e]] += ri * self.p.row_val[e];
                    }
                    row[n + i] = -ri;
                }
            } else {
                for j in 0..n + m {
                    row[j] = if self.state[j] == VarState::Basic { 0.0 } else { self.dot_col(j, &rho) };
                }
            }
            // Entering candidates.
            let eligible = |j: usize, a: f64, st: VarState, lo: f64, up: f64| -> bool {
                if st == VarState::Basic || lo == up || a.abs() < PIVOT_TOL {
                    return false;
                }
                let inc = if below { a < 0.0 } else { a > 0.0 };
                let _ = j;
                match st {
                    VarState::Lower => inc,
                    VarState::Upper => !inc,
                    VarState::Zero => true,
                    VarState::Basic => false,
                }
            };
            let mut tmax = f64::INFINITY;
            for j in 0..n + m {
                let a = row[j];
                if eligible(j, a, self.state[j], self.lo[j], self.up[j]) {
                    tmax = tmax.min((self.d[j].abs() + OPT_TOL) / a.abs());
                }
            }
            if tmax.is_infinite() {
                let mut ray = rho.clone();
                if below {
                    ray.iter_mut().for_each(|v| *v = -*v);
                }
                self.ray = Some(ray);
                self.w1 = rho;
                return Outcome::Infeasible;
            }
            let mut q = NONE;
            let mut qmag = 0.0;
            for j in 0..n + m {
                let a = row[j];
                if eligible(j, a, self.state[j], self.lo[j], self.up[j])
                    && self.d[j].abs() / a.abs() <= tmax
                    && a.abs() > qmag
                {
                    qmag = a.abs();
                    q = j;
                }
            }
            self.w1 = rho;
            let mut alpha = std::mem::take(&mut self.w2);
            alpha.iter_mut().for_each(|v| *v = 0.0);
            self.scatter_col(q, &mut alpha, 1.0);
            self.factor.as_mut().unwrap().ftran(&mut alpha);
            let ar = alpha[r];
            if ar.abs() < PIVOT_TOL || (ar - row[q]).abs() > 1e-6 * (1.0 + ar.abs()) {
                self.w2 = alpha;
                if self.factor.as_ref().unwrap().num_etas() == 0 {
                    return Outcome::Fallback;
                }
                if !self.refactor() {
                    return Outcome::Numerical;
                }
                budget += 1;
                continue;
            }
            let target = if below { self.lo[leave] } else { self.up[leave] };
            let dq = (self.x[leave] - target) / ar;
            self.x[q] += dq;
            for k in 0..m {
                if alpha[k] != 0.0 {
                    self.x[self.head[k]] -= alpha[k] * dq;
                }
            }
            self.state[leave] = if below { VarState::Lower } else { VarState::Upper };
            self.pos[leave] = NONE;
            self.place_nonbasic(leave);
            self.head[r] = q;
            self.state[q] = VarState::Basic;
            self.pos[q] = r;
            self.factor.as_mut().unwrap().push_eta(r, &alpha);
            self.w2 = alpha;
            self.iterations += 1;
            budget += 1;
        }
    }

    fn finish(mut self, outcome: Outcome) -> LpSolution {
        let p = self.p;
        let (n, m) = (p.n, p.m);
        let status = match outcome {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => LpStatus::Infeasible,
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::Limit => LpStatus::IterationLimit,
            Outcome::Numerical | Outcome::Fallback => LpStatus::NumericalFailure,
        };
        let mut sol = LpSolution::without_solution(status, n, m, self.iterations);
        match status {
            LpStatus::Optimal => {
                let cost = p.cost.clone();
                self.compute_duals(&cost);
                let mut x = vec![0.0; n];
                for j in 0..n {
                    let v = self.x[j] * p.col_scale[j];
                    let (l, u) = (self.lo[j] * p.col_scale[j], self.up[j] * p.col_scale[j]);
                    x[j] = v.clamp(l, u);
                }
                let mut duals = vec![0.0; m];
                for i in 0..m {
                    let mut y = self.y[i];
                    // Zero out sign noise within tolerance.
                    let bad = match p.relations[i] {
                        Relation::Ge => y < 0.0,
                        Relation::Le => y > 0.0,
                        Relation::Eq => false,
                    };
                    if bad && y.abs() <= OPT_TOL {
                        y = 0.0;
                    }
                    duals[i] = p.sign * p.row_scale[i] * y;
                }
                let mut rc = vec![0.0; n];
                for j in 0..n {
                    let raw = self.d[j];
                    let dj = match self.state[j] {
                        VarState::Basic => 0.0,
                        _ if self.lo[j] == self.up[j] => raw,
                        VarState::Lower if raw < 0.0 && raw >= -OPT_TOL => 0.0,
                        VarState::Upper if raw > 0.0 && raw <= OPT_TOL => 0.0,
                        VarState::Zero if raw.abs() <= OPT_TOL => 0.0,
                        _ => raw,
                    };
                    rc[j] = p.sign * dj / p.col_scale[j];
                }
                sol.objective = p.offset + x.iter().zip(&p.orig_cost).map(|(a, b)| a * b).sum::<f64>();
                sol.x = x;
                sol.duals = duals;
                sol.reduced_costs = rc;
                sol.basis = Some(Basis {
                    head: self.head.clone(),
                    state: self.state.clone(),
                });
            }
            LpStatus::Infeasible => {
                let ray = self.ray.take().unwrap_or_else(|| vec![0.0; m]);
                let mut out = vec![0.0; m];
                let scale = ray.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
                for i in 0..m {
                    let mut v = ray[i] / scale;
                    let bad = match p.relations[i] {
                        Relation::Le => v > 0.0,
                        Relation::Ge => v < 0.0,
                        Relation::Eq => false,
                    };
                    if bad || v.abs() < 1e-13 {
                        v = 0.0;
                    }
                    out[i] = v * p.row_scale[i];
                }
                sol.farkas = Some(out);
                sol.basis = Some(Basis {
                    head: self.head.clone(),
                    state: self.state.clone(),
                });
            }
            _ => {}
        }
        sol
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { r: usize, t: f64, to_upper: bool },
}
