//! Built-in 6-bus system, its experiment variants, and synthetic fire scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::case::{
    segmentize_quadratic, Bus, DemandPoint, FireScores, Generator, Line, NetworkCase, RobustParams, SolarUnit,
};
use crate::error::CaseError;

pub const SIX_BUS_HORIZON: usize = 24;

/// The 6-bus, 3-unit, 7-line test system with constant demand at buses
/// 3, 4 and 5 (20/40/40 % of the 360 MW installed capacity), no deviations
/// and zero fire scores.
pub fn build_6bus_case() -> NetworkCase {
    let t = SIX_BUS_HORIZON;
    let buses = (1..=6)
        .map(|i| Bus {
            label: i.to_string(),
            reference: i == 1,
        })
        .collect();
    let table = [
        ("L1", 1, 2, 0.170, 200.0),
        ("L2", 2, 3, 0.037, 100.0),
        ("L3", 1, 4, 0.258, 100.0),
        ("L4", 2, 4, 0.197, 100.0),
        ("L5", 4, 5, 0.037, 100.0),
        ("L6", 5, 6, 0.140, 100.0),
        ("L7", 3, 6, 0.018, 100.0),
    ];
    let lines: Vec<Line> = table
        .iter()
        .map(|&(label, f, to, x, cap)| Line {
            label: label.into(),
            from: f - 1,
            to: to - 1,
            reactance: x,
            limit: cap,
        })
        .collect();
    let units = [
        ("G1", 1, 100.0, 220.0, 177.0, 13.5, 0.00045),
        ("G2", 2, 10.0, 100.0, 130.0, 40.0, 0.001),
        ("G3", 3, 10.0, 40.0, 137.0, 17.7, 0.005),
    ];
    let generators: Vec<Generator> = units
        .iter()
        .map(|&(label, bus, pmin, pmax, a, b, c)| Generator {
            label: label.into(),
            bus: bus - 1,
            p_min: pmin,
            p_max: pmax,
            segments: segmentize_quadratic(a, b, c, pmin, pmax, 3).expect("convex"),
        })
        .collect();
    let capacity: f64 = generators.iter().map(|g| g.p_max).sum();
    let demands = [(3, 0.2), (4, 0.4), (5, 0.4)]
        .iter()
        .map(|&(bus, share)| DemandPoint {
            bus: bus - 1,
            nominal: vec![share * capacity; t],
            deviation: vec![0.0; t],
        })
        .collect();
    let nl = lines.len();
    NetworkCase {
        base_mva: 100.0,
        horizon: t,
        buses,
        lines,
        generators,
        solar: Vec::new(),
        demands,
        fire_scores: FireScores::zeros(nl, t),
        params: RobustParams::default(),
    }
}

/// Daylight availability shape: zero at night, `capacity` at noon.
pub fn solar_profile(capacity: f64, horizon: usize) -> Vec<f64> {
    (0..horizon)
        .map(|t| {
            let v = capacity * (PI * (t as f64 - 6.0) / 12.0).sin().max(0.0);
            // Round off sin() noise so profiles print cleanly.
            (v * 1e9).round() / 1e9
        })
        .collect()
}

/// Removes a generator by label; returns whether it existed.
pub fn remove_generator(case: &mut NetworkCase, label: &str) -> bool {
    let before = case.generators.len();
    case.generators.retain(|g| g.label != label);
    case.generators.len() != before
}

/// Adds a solar unit with the daylight shape at the bus with this label.
pub fn add_solar(case: &mut NetworkCase, label: &str, bus_label: &str, capacity: f64) -> Result<(), CaseError> {
    let bus = case
        .buses
        .iter()
        .position(|b| b.label == bus_label)
        .ok_or_else(|| CaseError::Invalid {
            entity: format!("solar {label}"),
            message: format!("unknown bus {bus_label}"),
        })?;
    let nominal = solar_profile(capacity, case.horizon);
    case.solar.push(SolarUnit {
        label: label.into(),
        bus,
        deviation: vec![0.0; nominal.len()],
        nominal,
    });
    Ok(())
}

/// 6-bus system with G3 replaced by a solar plant of `capacity` MW at bus 3.
pub fn six_bus_with_solar_for_g3(capacity: f64) -> NetworkCase {
    let mut c = build_6bus_case();
    remove_generator(&mut c, "G3");
    add_solar(&mut c, "S3", "3", capacity).expect("bus 3 exists");
    c
}

/// 6-bus system without G3 and with solar at the listed buses.
pub fn six_bus_with_solar_sites(sites: &[(&str, f64)]) -> NetworkCase {
    let mut c = build_6bus_case();
    remove_generator(&mut c, "G3");
    for (bus, mw) in sites {
        add_solar(&mut c, &format!("S{bus}"), bus, *mw).expect("known bus");
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub seed: u64,
    /// First and one-past-last hour (0-based) of the daily risk window.
    pub peak_hours: (usize, usize),
    /// Overall score level in [0, 1).
    pub base_level: f64,
    /// Lines whose scores stay zero.
    pub safe_lines: Vec<usize>,
    /// Lines with a positive score in every hour.
    pub hot_lines: Vec<usize>,
}

impl ScoreConfig {
    pub fn new(seed: u64, base_level: f64) -> Self {
        ScoreConfig {
            seed,
            peak_hours: (9, 19),
            base_level,
            safe_lines: Vec::new(),
            hot_lines: Vec::new(),
        }
    }
}

/// The configuration used for 6-bus experiments: L6 and L7 always carry
/// risk, L5 never does.
pub fn six_bus_score_config(seed: u64) -> ScoreConfig {
    ScoreConfig {
        seed,
        peak_hours: (9, 19),
        base_level: 0.3,
        safe_lines: vec![4],
        hot_lines: vec![5, 6],
    }
}

/// Seeded per-line diurnal scores. Ordinary lines are zero outside the peak
/// window; hot lines keep a floor every hour; at least one line is all zero.
/// Values are rounded to four decimals and clipped below 1.
pub fn generate_synthetic_scores(case: &NetworkCase, cfg: &ScoreConfig) -> FireScores {
    let (nl, t_n) = (case.lines.len(), case.horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let level = cfg.base_level.clamp(0.0, 0.9999);
    let (start, end) = cfg.peak_hours;
    let span = end.saturating_sub(start).max(1) as f64;
    let mut values = vec![vec![0.0; t_n]; nl];
    let mut amplitude = vec![0.0; nl];
    for l in 0..nl {
        let amp = level * rng.gen_range(0.3..1.0);
        let floor = level * rng.gen_range(0.2..0.5);
        amplitude[l] = amp;
        for t in 0..t_n {
            let noise = rng.gen_range(0.85..1.15);
            let h = t % 24;
            let mut v = if h >= start && h < end {
                amp * (PI * (h - start) as f64 / span + PI / (2.0 * span)).sin().max(0.0) * noise
            } else {
                0.0
            };
            if cfg.hot_lines.contains(&l) {
                v = v.max(floor * noise);
            }
            values[l][t] = ((v * 1e4).round() / 1e4).clamp(0.0, 0.9999);
        }
    }
    let mut safe = cfg.safe_lines.clone();
    if safe.is_empty() && nl > 0 {
        // Quietest ordinary line, else line 0.
        let pick = (0..nl)
            .filter(|l| !cfg.hot_lines.contains(l))
            .min_by(|&a, &b| amplitude[a].total_cmp(&amplitude[b]).then(a.cmp(&b)))
            .unwrap_or(0);
        safe.push(pick);
    }
    for l in safe {
        if l < nl {
            values[l].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    FireScores { values }
}

/// The first `hours` hours of a case.
pub fn truncate_horizon(case: &NetworkCase, hours: usize) -> NetworkCase {
    let mut c = case.clone();
    let h = hours.min(c.horizon);
    c.horizon = h;
    for s in &mut c.solar {
        s.nominal.truncate(h);
        s.deviation.truncate(h);
    }
    for d in &mut c.demands {
        d.nominal.truncate(h);
        d.deviation.truncate(h);
    }
    for row in &mut c.fire_scores.values {
        row.truncate(h);
    }
    c
}
