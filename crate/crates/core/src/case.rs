//! Network instance: buses, lines, units, profiles, fire scores and the
//! robust-solve parameters.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::CaseError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub label: String,
    pub reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub label: String,
    pub from: usize,
    pub to: usize,
    /// Per-unit series reactance.
    pub reactance: f64,
    /// Thermal rating in MW.
    pub limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub width: f64,
    pub marginal_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub segments: Vec<Segment>,
}

impl Generator {
    /// Cost of producing `p` MW when segments are filled in order.
    pub fn cost(&self, p: f64) -> f64 {
        let mut left = p;
        let mut total = 0.0;
        for s in &self.segments {
            let take = left.min(s.width).max(0.0);
            total += take * s.marginal_cost;
            left -= take;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolarUnit {
    pub label: String,
    pub bus: usize,
    /// Nominal availability per hour, MW.
    pub nominal: Vec<f64>,
    /// Maximum downward deviation per hour, MW.
    pub deviation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandPoint {
    pub bus: usize,
    pub nominal: Vec<f64>,
    /// Maximum upward deviation per hour, MW.
    pub deviation: Vec<f64>,
}

/// Ignition scores indexed `[line][hour]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FireScores {
    pub values: Vec<Vec<f64>>,
}

impl FireScores {
    pub fn zeros(lines: usize, horizon: usize) -> Self {
        FireScores {
            values: vec![vec![0.0; horizon]; lines],
        }
    }

    pub fn get(&self, line: usize, hour: usize) -> f64 {
        self.values[line][hour]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskIntakeMode {
    /// The score budget applies to each hour separately.
    Conservative,
    /// One budget for the whole horizon.
    Cumulative,
}

impl std::fmt::Display for RiskIntakeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RiskIntakeMode::Conservative => "conservative",
            RiskIntakeMode::Cumulative => "cumulative",
        })
    }
}

impl std::str::FromStr for RiskIntakeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "conservative" => Ok(RiskIntakeMode::Conservative),
            "cumulative" => Ok(RiskIntakeMode::Cumulative),
            other => Err(format!("unknown risk intake mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustParams {
    pub risk_tolerance: f64,
    pub risk_intake_mode: RiskIntakeMode,
    /// Budget of uncertainty: how many deviation indicators may be active.
    pub budget: u32,
    /// Penalty for unserved energy, $/MWh.
    pub shed_penalty: f64,
    pub big_m: f64,
    pub convergence_gap: f64,
    pub max_iterations: usize,
}

impl Default for RobustParams {
    fn default() -> Self {
        RobustParams {
            risk_tolerance: 0.0,
            risk_intake_mode: RiskIntakeMode::Conservative,
            budget: 0,
            shed_penalty: 1000.0,
            big_m: 1e6,
            convergence_gap: 1e-4,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    /// Power base used to turn per-unit reactances into MW flows.
    pub base_mva: f64,
    pub horizon: usize,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub solar: Vec<SolarUnit>,
    pub demands: Vec<DemandPoint>,
    pub fire_scores: FireScores,
    pub params: RobustParams,
}

fn invalid(entity: impl Into<String>, message: impl Into<String>) -> CaseError {
    CaseError::Invalid {
        entity: entity.into(),
        message: message.into(),
    }
}

impl NetworkCase {
    pub fn reference_bus(&self) -> usize {
        self.buses.iter().position(|b| b.reference).unwrap_or(0)
    }

    /// Big-M of the switched angle row: rating plus the largest flow the
    /// angle bounds allow.
    pub fn line_big_m(&self, l: usize) -> f64 {
        let line = &self.lines[l];
        line.limit + self.base_mva * 2.0 * PI / line.reactance
    }

    pub fn max_marginal_cost(&self) -> f64 {
        self.generators
            .iter()
            .flat_map(|g| g.segments.iter().map(|s| s.marginal_cost))
            .fold(0.0, f64::max)
    }

    pub fn total_demand(&self, hour: usize) -> f64 {
        self.demands.iter().map(|d| d.nominal[hour]).sum()
    }

    /// Number of (entity, hour) pairs that can deviate.
    pub fn uncertainty_count(&self) -> usize {
        let d: usize = self
            .demands
            .iter()
            .map(|d| d.deviation.iter().filter(|&&v| v > 0.0).count())
            .sum();
        let s: usize = self
            .solar
            .iter()
            .map(|s| s.deviation.iter().filter(|&&v| v > 0.0).count())
            .sum();
        d + s
    }

    /// Sets every demand and solar deviation to `fraction` of its nominal value.
    pub fn set_deviation_fraction(&mut self, fraction: f64) {
        for d in &mut self.demands {
            d.deviation = d.nominal.iter().map(|v| v * fraction).collect();
        }
        for s in &mut self.solar {
            s.deviation = s.nominal.iter().map(|v| v * fraction).collect();
        }
    }

    /// Checks every structural invariant, naming the first offending entity.
    pub fn validate(&self) -> Result<(), CaseError> {
        let nb = self.buses.len();
        let t = self.horizon;
        if t == 0 {
            return Err(invalid("case", "horizon must be at least one hour"));
        }
        if nb == 0 {
            return Err(invalid("case", "no buses"));
        }
        if !(self.base_mva > 0.0 && self.base_mva.is_finite()) {
            return Err(invalid("case", "base_mva must be positive"));
        }
        let refs = self.buses.iter().filter(|b| b.reference).count();
        if refs != 1 {
            return Err(invalid("case", format!("expected exactly one reference bus, found {refs}")));
        }
        let mut labels = std::collections::BTreeSet::new();
        for b in &self.buses {
            if !labels.insert(&b.label) {
                return Err(invalid(format!("bus {}", b.label), "duplicate id"));
            }
        }
        let bus_ok = |b: usize| b < nb;
        let mut labels = std::collections::BTreeSet::new();
        for line in &self.lines {
            let e = format!("line {}", line.label);
            if !labels.insert(&line.label) {
                return Err(invalid(e, "duplicate id"));
            }
            if !bus_ok(line.from) || !bus_ok(line.to) {
                return Err(invalid(e, "references an unknown bus"));
            }
            if line.from == line.to {
                return Err(invalid(e, "from_bus equals to_bus"));
            }
            if !(line.reactance > 0.0 && line.reactance.is_finite()) {
                return Err(invalid(e, "reactance x_l must be > 0"));
            }
            if !(line.limit > 0.0 && line.limit.is_finite()) {
                return Err(invalid(e, "flow limit must be > 0"));
            }
        }
        let mut labels = std::collections::BTreeSet::new();
        for g in &self.generators {
            let e = format!("generator {}", g.label);
            if !labels.insert(&g.label) {
                return Err(invalid(e, "duplicate id"));
            }
            if !bus_ok(g.bus) {
                return Err(invalid(e, "references an unknown bus"));
            }
            if !(g.p_min >= 0.0 && g.p_min <= g.p_max && g.p_max.is_finite()) {
                return Err(invalid(e, "requires 0 <= p_min <= p_max"));
            }
            if g.segments.is_empty() {
                return Err(invalid(e, "no cost segments"));
            }
            let width: f64 = g.segments.iter().map(|s| s.width).sum();
            if g.segments.iter().any(|s| !(s.width >= 0.0) || !s.marginal_cost.is_finite()) {
                return Err(invalid(e, "segment widths must be >= 0 and costs finite"));
            }
            if width < g.p_max - 1e-9 * (1.0 + g.p_max) {
                return Err(invalid(e, "segment widths do not cover p_max"));
            }
            if g.segments.windows(2).any(|w| w[1].marginal_cost < w[0].marginal_cost) {
                return Err(invalid(e, "marginal costs must be non-decreasing"));
            }
        }
        let profile = |e: &str, nominal: &[f64], dev: &[f64]| -> Result<(), CaseError> {
            if nominal.len() != t || dev.len() != t {
                return Err(invalid(
                    e,
                    format!("profile length {} / {} does not match horizon {t}", nominal.len(), dev.len()),
                ));
            }
            for (h, (&n, &d)) in nominal.iter().zip(dev).enumerate() {
                if !(n >= 0.0 && n.is_finite()) {
                    return Err(invalid(e, format!("nominal value at hour {} must be >= 0", h + 1)));
                }
                if !(d >= 0.0 && d <= n + 1e-12) {
                    return Err(invalid(e, format!("deviation at hour {} must lie in [0, nominal]", h + 1)));
                }
            }
            Ok(())
        };
        let mut labels = std::collections::BTreeSet::new();
        for s in &self.solar {
            let e = format!("solar {}", s.label);
            if !labels.insert(&s.label) {
                return Err(invalid(e, "duplicate id"));
            }
            if !bus_ok(s.bus) {
                return Err(invalid(e, "references an unknown bus"));
            }
            profile(&e, &s.nominal, &s.deviation)?;
        }
        let mut seen = vec![false; nb];
        for d in &self.demands {
            if !bus_ok(d.bus) {
                return Err(invalid("demand", "references an unknown bus"));
            }
            let e = format!("demand at bus {}", self.buses[d.bus].label);
            if seen[d.bus] {
                return Err(invalid(e, "more than one demand point on the bus"));
            }
            seen[d.bus] = true;
            profile(&e, &d.nominal, &d.deviation)?;
        }
        if self.fire_scores.values.len() != self.lines.len() {
            return Err(invalid("fire scores", "one profile per line required"));
        }
        for (l, row) in self.fire_scores.values.iter().enumerate() {
            let e = format!("fire scores of line {}", self.lines[l].label);
            if row.len() != t {
                return Err(invalid(e, format!("{} hours given, horizon is {t}", row.len())));
            }
            if let Some(h) = row.iter().position(|&v| !(0.0..1.0).contains(&v)) {
                return Err(invalid(e, format!("score at hour {} outside [0, 1)", h + 1)));
            }
        }
        self.validate_params()?;
        if !self.is_connected() {
            return Err(invalid("case", "network is not connected with all lines energized"));
        }
        Ok(())
    }

    fn validate_params(&self) -> Result<(), CaseError> {
        let p = &self.params;
        if !(p.risk_tolerance >= 0.0 && p.risk_tolerance.is_finite()) {
            return Err(invalid("robust_params", "risk_tolerance must be >= 0"));
        }
        if !(p.shed_penalty > self.max_marginal_cost() && p.shed_penalty.is_finite()) {
            return Err(invalid(
                "robust_params",
                format!(
                    "shed_penalty {} must exceed the largest marginal cost {}",
                    p.shed_penalty,
                    self.max_marginal_cost()
                ),
            ));
        }
        let need = (0..self.lines.len()).map(|l| self.line_big_m(l)).fold(0.0, f64::max);
        if !(p.big_m > need && p.big_m.is_finite()) {
            return Err(invalid("robust_params", format!("big_m {} must exceed {need:.3}", p.big_m)));
        }
        if !(p.convergence_gap > 0.0 && p.convergence_gap < 1.0) {
            return Err(invalid("robust_params", "convergence_gap must lie in (0, 1)"));
        }
        if p.max_iterations < 1 {
            return Err(invalid("robust_params", "max_iterations must be >= 1"));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for l in &self.lines {
            adj[l.from].push(l.to);
            adj[l.to].push(l.from);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &k in &adj[i] {
                if !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Splits a convex quadratic cost `a + bP + cP²` into equal-width linear
/// segments over `[0, p_max]`, each priced at the average slope over the
/// segment. The constant `a` is not part of the dispatch cost.
pub fn segmentize_quadratic(
    _a: f64,
    b: f64,
    c: f64,
    p_min: f64,
    p_max: f64,
    n_segments: usize,
) -> Result<Vec<Segment>, CaseError> {
    if c < 0.0 {
        return Err(invalid("cost curve", "negative quadratic coefficient is not convex"));
    }
    if n_segments == 0 {
        return Err(invalid("cost curve", "at least one segment required"));
    }
    if !(p_min <= p_max) || p_max < 0.0 {
        return Err(invalid("cost curve", "requires p_min <= p_max"));
    }
    let w = p_max / n_segments as f64;
    Ok((0..n_segments)
        .map(|k| Segment {
            width: w,
            marginal_cost: b + 2.0 * c * (k as f64 + 0.5) * w,
        })
        .collect())
}
