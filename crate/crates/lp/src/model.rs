use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::simplex::Basis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One linear constraint `coeffs · x (relation) rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Self {
        Row {
            coeffs,
            relation,
            rhs,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("solution is not optimal (status {0:?})")]
    NotOptimal(LpStatus),
    #[error("{tags} tags supplied for {rows} rows")]
    TagCount { tags: usize, rows: usize },
    #[error("duplicate dual tag at row {0}")]
    DuplicateTag(usize),
}

/// A linear program over bounded variables.
///
/// Bounds may be infinite. Constraint rows hold sparse coefficient lists
/// indexed by variable position. `objective_offset` is a constant added to
/// every reported objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    /// Optional names; either empty or one per variable.
    pub var_names: Vec<String>,
    /// Optional names; either empty or one per row.
    pub row_names: Vec<String>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            objective_offset: 0.0,
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
            var_names: Vec::new(),
            row_names: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        let j = self.objective.len();
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        if !self.var_names.is_empty() {
            self.var_names.push(format!("x{j}"));
        }
        j
    }

    pub fn add_named_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        if self.var_names.len() < self.objective.len() {
            let start = self.var_names.len();
            self.var_names.extend((start..self.objective.len()).map(|j| format!("x{j}")));
        }
        let j = self.objective.len();
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.var_names.push(name.into());
        j
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        let i = self.rows.len();
        self.rows.push(Row::new(coeffs, relation, rhs));
        if !self.row_names.is_empty() {
            self.row_names.push(format!("r{i}"));
        }
        i
    }

    pub fn add_named_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        if self.row_names.len() < self.rows.len() {
            let start = self.row_names.len();
            self.row_names.extend((start..self.rows.len()).map(|i| format!("r{i}")));
        }
        let i = self.rows.len();
        self.rows.push(Row::new(coeffs, relation, rhs));
        self.row_names.push(name.into());
        i
    }

    pub fn var_name(&self, j: usize) -> String {
        self.var_names.get(j).cloned().unwrap_or_else(|| format!("x{j}"))
    }

    pub fn row_name(&self, i: usize) -> String {
        self.row_names.get(i).cloned().unwrap_or_else(|| format!("r{i}"))
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::InvalidModel("bound vectors do not match variable count".into()));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(LpError::InvalidModel(format!(
                    "variable {} has bounds [{l}, {u}]",
                    self.var_name(j)
                )));
            }
            if !self.objective[j].is_finite() {
                return Err(LpError::InvalidModel(format!(
                    "variable {} has non-finite cost",
                    self.var_name(j)
                )));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::InvalidModel(format!(
                    "row {} has non-finite right-hand side",
                    self.row_name(i)
                )));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::InvalidModel(format!(
                        "row {} references variable {j} of {n}",
                        self.row_name(i)
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::InvalidModel(format!(
                        "row {} has a non-finite coefficient",
                        self.row_name(i)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest violation of any row or bound, divided by `1 + |rhs|` for rows.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            worst = worst.max(row.violation(x) / (1.0 + row.rhs.abs()));
        }
        for j in 0..self.num_vars() {
            worst = worst.max((self.lower[j] - x[j]).max(0.0));
            worst = worst.max((x[j] - self.upper[j]).max(0.0));
        }
        worst
    }

    /// Objective of the dual program implied by row duals and reduced costs.
    ///
    /// Each reduced cost is paired with the bound its sign points at; an
    /// infinite bound paired with a non-negligible reduced cost yields an
    /// infinite (dual infeasible) value.
    pub fn dual_objective(&self, duals: &[f64], reduced_costs: &[f64]) -> f64 {
        let sign = match self.sense {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        };
        let mut total = self.objective_offset;
        for (row, y) in self.rows.iter().zip(duals) {
            total += row.rhs * y;
        }
        for j in 0..self.num_vars() {
            let d = reduced_costs[j];
            if d.abs() <= 1e-11 {
                continue;
            }
            let bound = if d * sign > 0.0 { self.lower[j] } else { self.upper[j] };
            if bound.is_infinite() {
                return if d * sign > 0.0 { -sign * f64::INFINITY } else { sign * f64::INFINITY };
            }
            total += d * bound;
        }
        total
    }

    /// Largest complementary-slackness product over rows and bounds.
    pub fn complementary_slackness_residual(&self, x: &[f64], duals: &[f64], reduced_costs: &[f64]) -> f64 {
        let sign = match self.sense {
            Sense::Min => 1.0,
            Sense::Max => -1.0,
        };
        let mut worst: f64 = 0.0;
        for (row, y) in self.rows.iter().zip(duals) {
            let slack = row.activity(x) - row.rhs;
            worst = worst.max((slack * y).abs());
        }
        for j in 0..self.num_vars() {
            let d = reduced_costs[j];
            let gap = if d * sign > 0.0 {
                x[j] - self.lower[j]
            } else if d * sign < 0.0 {
                self.upper[j] - x[j]
            } else {
                0.0
            };
            if gap.is_finite() {
                worst = worst.max((gap * d).abs());
            }
        }
        worst
    }

    /// Supremum of `ray · (A x − s)` over the variable box and the row sets
    /// `s ∈ {rhs}`, `s ≤ rhs` or `s ≥ rhs`. A negative value certifies that no
    /// point satisfies every row and bound.
    pub fn farkas_supremum(&self, ray: &[f64]) -> f64 {
        let n = self.num_vars();
        let mut col = vec![0.0; n];
        let mut sup = 0.0;
        for (row, &r) in self.rows.iter().zip(ray) {
            if r == 0.0 {
                continue;
            }
            for &(j, a) in &row.coeffs {
                col[j] += r * a;
            }
            let wrong_sign = match row.relation {
                Relation::Eq => false,
                Relation::Le => r > 1e-12,
                Relation::Ge => r < -1e-12,
            };
            if wrong_sign {
                return f64::INFINITY;
            }
            sup -= r * row.rhs;
        }
        for j in 0..n {
            let g = col[j];
            if g.abs() <= 1e-12 {
                continue;
            }
            let b = if g > 0.0 { self.upper[j] } else { self.lower[j] };
            if b.is_infinite() {
                return f64::INFINITY;
            }
            sup += g * b;
        }
        sup
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The basis could not be kept well conditioned after repeated refactorization.
    NumericalFailure,
    IterationLimit,
}

/// Result of [`crate::solve_lp`].
///
/// `duals[i]` is the rate of change of the objective with respect to the
/// right-hand side of row `i`; `reduced_costs[j]` is the rate of change with
/// respect to variable `j` moving off its bound. Under `Min`, duals of `≥`
/// rows are non-negative and duals of `≤` rows non-positive.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Row multipliers proving infeasibility, see [`LinearProgram::farkas_supremum`].
    pub farkas: Option<Vec<f64>>,
    pub iterations: usize,
    pub basis: Option<Basis>,
}

impl LpSolution {
    pub(crate) fn without_solution(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::NAN,
            },
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            farkas: None,
            iterations,
            basis: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Pairs each row dual with a caller-supplied semantic tag.
pub fn extract_duals<T: Ord + Clone>(sol: &LpSolution, row_tags: &[T]) -> Result<BTreeMap<T, f64>, LpError> {
    if sol.status != LpStatus::Optimal {
        return Err(LpError::NotOptimal(sol.status));
    }
    if row_tags.len() != sol.duals.len() {
        return Err(LpError::TagCount {
            tags: row_tags.len(),
            rows: sol.duals.len(),
        });
    }
    let mut map = BTreeMap::new();
    for (i, (tag, &y)) in row_tags.iter().zip(&sol.duals).enumerate() {
        if map.insert(tag.clone(), y).is_some() {
            return Err(LpError::DuplicateTag(i));
        }
    }
    Ok(map)
}
