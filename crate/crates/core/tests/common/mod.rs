#![allow(dead_code)]

use firegrid_core::{
    Bus, DemandPoint, FireScores, Generator, Line, NetworkCase, RiskIntakeMode, RobustParams, Segment, SolarUnit,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct ToyLimits {
    pub max_buses: usize,
    pub max_hours: usize,
    /// Upper bound on lines × hours.
    pub max_line_hours: usize,
    pub max_budget: u32,
}

impl Default for ToyLimits {
    fn default() -> Self {
        ToyLimits {
            max_buses: 4,
            max_hours: 3,
            max_line_hours: 12,
            max_budget: 3,
        }
    }
}

/// Small random network: a spanning tree plus possibly one extra line, one or
/// two generators, optional solar, demand on some buses.
pub fn toy_case(seed: u64, lim: &ToyLimits) -> NetworkCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.gen_range(1..=lim.max_buses);
    let mut hours = rng.gen_range(1..=lim.max_hours);
    let buses = (0..nb)
        .map(|i| Bus {
            label: format!("b{}", i + 1),
            reference: i == 0,
        })
        .collect();
    let mut edges = Vec::new();
    for i in 1..nb {
        edges.push((rng.gen_range(0..i), i));
    }
    if nb >= 3 && rng.gen_bool(0.5) {
        let a = rng.gen_range(0..nb);
        let b = (a + 1 + rng.gen_range(0..nb - 1)) % nb;
        edges.push((a.min(b), a.max(b)));
    }
    // Drop the extra line first, then shorten the horizon; the tree stays.
    if edges.len() * hours > lim.max_line_hours && edges.len() + 1 > nb {
        edges.pop();
    }
    while hours > 1 && edges.len() * hours > lim.max_line_hours {
        hours -= 1;
    }
    let lines: Vec<Line> = edges
        .iter()
        .enumerate()
        .map(|(k, &(a, b))| Line {
            label: format!("l{}", k + 1),
            from: a,
            to: b,
            reactance: rng.gen_range(0.05..0.3),
            limit: rng.gen_range(20.0..120.0f64).round(),
        })
        .collect();
    let ng = rng.gen_range(1..=2);
    let generators = (0..ng)
        .map(|g| {
            let p_max: f64 = rng.gen_range(40.0..120.0f64).round();
            let p_min = if rng.gen_bool(0.4) { rng.gen_range(5.0..20.0f64).round() } else { 0.0 };
            let ns = rng.gen_range(1..=3);
            let mut cost: f64 = rng.gen_range(10.0..30.0f64).round();
            let segments = (0..ns)
                .map(|_| {
                    let s = Segment {
                        width: p_max / ns as f64,
                        marginal_cost: cost,
                    };
                    cost += rng.gen_range(0.0..15.0f64).round();
                    s
                })
                .collect();
            Generator {
                label: format!("g{}", g + 1),
                bus: rng.gen_range(0..nb),
                p_min,
                p_max,
                segments,
            }
        })
        .collect();
    let mut solar = Vec::new();
    if rng.gen_bool(0.5) {
        let nominal: Vec<f64> = (0..hours).map(|_| rng.gen_range(0.0..50.0f64).round()).collect();
        let frac = rng.gen_range(0.0..0.5);
        solar.push(SolarUnit {
            label: "s1".into(),
            bus: rng.gen_range(0..nb),
            deviation: nominal.iter().map(|v| (v * frac).round()).collect(),
            nominal,
        });
    }
    let mut demands = Vec::new();
    for i in 0..nb {
        if demands.is_empty() || rng.gen_bool(0.6) {
            let nominal: Vec<f64> = (0..hours).map(|_| rng.gen_range(10.0..80.0f64).round()).collect();
            let frac = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.05..0.4) };
            demands.push(DemandPoint {
                bus: i,
                deviation: nominal.iter().map(|v| (v * frac).round()).collect(),
                nominal,
            });
        }
    }
    let nl = lines.len();
    let values = (0..nl)
        .map(|_| {
            (0..hours)
                .map(|_| if rng.gen_bool(0.4) { 0.0 } else { rng.gen_range(0.0..0.5f64) })
                .collect()
        })
        .collect();
    let params = RobustParams {
        risk_tolerance: rng.gen_range(0.0..1.0),
        risk_intake_mode: if rng.gen_bool(0.5) {
            RiskIntakeMode::Conservative
        } else {
            RiskIntakeMode::Cumulative
        },
        budget: rng.gen_range(0..=lim.max_budget),
        shed_penalty: rng.gen_range(100.0..1000.0f64).round(),
        big_m: 1e6,
        convergence_gap: 1e-9,
        max_iterations: 200,
    };
    let case = NetworkCase {
        base_mva: 100.0,
        horizon: hours,
        buses,
        lines,
        generators,
        solar,
        demands,
        fire_scores: FireScores { values },
        params,
    };
    case.validate().expect("toy case is valid");
    case
}

/// Every line-status plan allowed by the risk budget.
pub fn feasible_plans(case: &NetworkCase) -> Vec<Vec<Vec<bool>>> {
    let (t_n, nl) = (case.horizon, case.lines.len());
    let bits = t_n * nl;
    assert!(bits <= 16);
    let mut plans = Vec::new();
    for mask in 0u32..1 << bits {
        let plan: Vec<Vec<bool>> = (0..t_n)
            .map(|t| (0..nl).map(|l| mask >> (t * nl + l) & 1 == 1).collect())
            .collect();
        let hourly: Vec<f64> = (0..t_n)
            .map(|t| (0..nl).filter(|&l| plan[t][l]).map(|l| case.fire_scores.get(l, t)).sum())
            .collect();
        let eps = case.params.risk_tolerance + 1e-12;
        let ok = match case.params.risk_intake_mode {
            RiskIntakeMode::Conservative => hourly.iter().all(|&h| h <= eps),
            RiskIntakeMode::Cumulative => hourly.iter().sum::<f64>() <= eps,
        };
        if ok {
            plans.push(plan);
        }
    }
    plans
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}
