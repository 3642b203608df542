//! `firegrid`: solve, sweep and cross-check wildfire-aware switching cases.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use firegrid_core::artifacts::{monotonicity_json, siting_csv, sweep_csv, sweep_rows_from_csv, write_solve_artifacts};
use firegrid_core::cases::{truncate_horizon, ScoreConfig};
use firegrid_core::ccg::ENUMERATION_LIMIT;
use firegrid_core::io::write_scores_csv;
use firegrid_core::risk::Siting;
use firegrid_core::sweep::monotonicity;
use firegrid_core::{
    brute_force_worst_case, compare_solar_siting, generate_synthetic_scores, load_case, robust_objective,
    run_ccg_with, run_sweep, worst_case, CcgStatus, MasterStrategy, NetworkCase, RiskIntakeMode, SweepAxis,
    SweepSpec,
};

#[derive(Parser)]
#[command(name = "firegrid", version, about = "Wildfire-aware robust line switching and dispatch")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and write plan, trace and risk reports.
    Solve(SolveArgs),
    /// Solve a grid of values along one parameter axis.
    Sweep(SweepArgs),
    /// Write seeded synthetic fire scores for a case as CSV.
    SynthScores(SynthArgs),
    /// Cross-check the solvers against enumeration on a small case.
    Validate(ValidateArgs),
    /// Compare solar placements under both risk intake modes.
    Siting(SitingArgs),
}

/// Parameter overrides. Precedence: case file < config file < flags.
#[derive(Args, Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Overrides {
    /// TOML file with any of the parameters below (snake_case keys).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    risk_tolerance: Option<f64>,
    #[arg(long)]
    risk_intake_mode: Option<RiskIntakeMode>,
    #[arg(long, allow_negative_numbers = true)]
    budget: Option<i64>,
    #[arg(long)]
    shed_penalty: Option<f64>,
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long)]
    convergence_gap: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    max_iterations: Option<i64>,
    /// Set every demand and solar deviation to this fraction of nominal.
    #[arg(long)]
    deviation: Option<f64>,
    /// Master strategy: auto, monolithic or hour-patterns.
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    case: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Directory for the output files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    case: PathBuf,
    /// risk-tolerance, budget, deviation (percent) or solar-mw.
    #[arg(long)]
    axis: SweepAxis,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    values: Vec<f64>,
    /// Deviation percentage applied at every point (not on the deviation axis).
    #[arg(long)]
    deviation_percent: Option<f64>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, env = "FIREGRID_WORKERS")]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    case: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// First peak hour (0-based).
    #[arg(long, default_value_t = 9)]
    peak_start: usize,
    /// One past the last peak hour.
    #[arg(long, default_value_t = 19)]
    peak_end: usize,
    #[arg(long, default_value_t = 0.3)]
    base_level: f64,
    /// Line ids kept at zero.
    #[arg(long, value_delimiter = ',')]
    safe: Vec<String>,
    /// Line ids with a positive score every hour.
    #[arg(long, value_delimiter = ',')]
    hot: Vec<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    case: PathBuf,
    /// Keep only the first N hours.
    #[arg(long)]
    hours: Option<usize>,
    /// Largest number of (plan, vertex) pairs to enumerate for the end-to-end check.
    #[arg(long, default_value_t = 200_000)]
    max_evaluations: u64,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SitingArgs {
    case: PathBuf,
    /// Total solar capacity, MW.
    #[arg(long)]
    total: f64,
    /// `name=bus:mw[,bus:mw...]`, repeatable.
    #[arg(long = "layout", required = true)]
    layouts: Vec<String>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status: 1 for input errors, 2 for an unconverged solve.
enum Failure {
    Input(String),
    Unconverged,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::SynthScores(a) => synth(a),
        Command::Validate(a) => validate(a),
        Command::Siting(a) => siting(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unconverged) => ExitCode::from(2),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_config(path: &Path) -> Result<Overrides, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

impl Overrides {
    /// Config file values under flag values.
    fn resolve(&self) -> Result<Overrides, Failure> {
        let base = match &self.config {
            Some(p) => read_config(p)?,
            None => Overrides::default(),
        };
        Ok(Overrides {
            config: None,
            risk_tolerance: self.risk_tolerance.or(base.risk_tolerance),
            risk_intake_mode: self.risk_intake_mode.or(base.risk_intake_mode),
            budget: self.budget.or(base.budget),
            shed_penalty: self.shed_penalty.or(base.shed_penalty),
            big_m: self.big_m.or(base.big_m),
            convergence_gap: self.convergence_gap.or(base.convergence_gap),
            max_iterations: self.max_iterations.or(base.max_iterations),
            deviation: self.deviation.or(base.deviation),
            strategy: self.strategy.clone().or(base.strategy),
        })
    }

    fn strategy(&self) -> Result<MasterStrategy, Failure> {
        match self.strategy.as_deref().unwrap_or("auto") {
            "auto" => Ok(MasterStrategy::Auto),
            "monolithic" => Ok(MasterStrategy::Monolithic),
            "hour-patterns" | "hour_patterns" => Ok(MasterStrategy::HourPatterns),
            other => Err(Failure::Input(format!("unknown strategy `{other}`"))),
        }
    }

    fn apply(&self, case: &mut NetworkCase) -> Outcome {
        let p = &mut case.params;
        if let Some(v) = self.risk_tolerance {
            p.risk_tolerance = v;
        }
        if let Some(v) = self.risk_intake_mode {
            p.risk_intake_mode = v;
        }
        if let Some(v) = self.budget {
            p.budget = u32::try_from(v).map_err(|_| format!("budget must be an integer >= 0, got {v}"))?;
        }
        if let Some(v) = self.shed_penalty {
            p.shed_penalty = v;
        }
        if let Some(v) = self.big_m {
            p.big_m = v;
        }
        if let Some(v) = self.convergence_gap {
            p.convergence_gap = v;
        }
        if let Some(v) = self.max_iterations {
            p.max_iterations = usize::try_from(v).map_err(|_| format!("max_iterations must be >= 1, got {v}"))?;
        }
        if let Some(d) = self.deviation {
            if !(0.0..=1.0).contains(&d) {
                return Err(Failure::Input(format!("deviation must be a fraction in [0, 1], got {d}")));
            }
            case.set_deviation_fraction(d);
        }
        case.validate()?;
        Ok(())
    }
}

/// Loads the case and applies config and flag overrides.
fn prepare(path: &Path, overrides: &Overrides) -> Result<(NetworkCase, MasterStrategy), Failure> {
    let o = overrides.resolve()?;
    let mut case = load_case(path)?;
    o.apply(&mut case)?;
    Ok((case, o.strategy()?))
}

fn status_name(s: CcgStatus) -> &'static str {
    match s {
        CcgStatus::Converged => "converged",
        CcgStatus::IterationLimit => "iteration-limit",
        CcgStatus::Stalled => "stalled",
    }
}

fn solve(a: SolveArgs) -> Outcome {
    let (case, strategy) = prepare(&a.case, &a.overrides)?;
    let r = run_ccg_with(&case, strategy)?;
    write_solve_artifacts(&a.out, &case, &r)?;
    println!(
        "{} objective {:.4} lower_bound {:.4} gap {:.3e} iterations {} -> {}",
        status_name(r.trace.status),
        r.upper_bound,
        r.lower_bound,
        r.gap(),
        r.trace.iterations.len(),
        a.out.display()
    );
    if r.trace.status == CcgStatus::Converged {
        Ok(())
    } else {
        Err(Failure::Unconverged)
    }
}

fn sweep(a: SweepArgs) -> Outcome {
    let (case, strategy) = prepare(&a.case, &a.overrides)?;
    let spec = SweepSpec {
        axis: a.axis,
        values: a.values,
        fixed: case.params.clone(),
        deviation_percent: a.deviation_percent,
    };
    spec.validate()?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = run_sweep(&case, &spec, workers, strategy);
    let table = sweep_csv(&rows);
    // The summary is recomputed from the emitted table, not the solver rows.
    let parsed = sweep_rows_from_csv(&table)?;
    let summary = monotonicity(spec.axis, &parsed, spec.fixed.convergence_gap);
    std::fs::create_dir_all(&a.out)?;
    std::fs::write(a.out.join("sweep.csv"), &table)?;
    std::fs::write(a.out.join("monotonicity.json"), monotonicity_json(&summary))?;
    for r in &rows {
        match (r.objective, &r.error) {
            (Some(obj), _) => println!("{} {} {} objective {obj:.4}", spec.axis.name(), r.value, r.status),
            (None, Some(e)) => println!("{} {} error {e}", spec.axis.name(), r.value),
            (None, None) => {}
        }
    }
    println!(
        "trend {} for {}: {}",
        if summary.holds { "holds" } else { "violated" },
        spec.axis.name(),
        a.out.display()
    );
    if rows.iter().all(|r| r.status == "converged") {
        Ok(())
    } else {
        Err(Failure::Unconverged)
    }
}

fn line_indices(case: &NetworkCase, ids: &[String]) -> Result<Vec<usize>, Failure> {
    ids.iter()
        .map(|id| {
            case.lines
                .iter()
                .position(|l| &l.label == id)
                .ok_or_else(|| Failure::Input(format!("unknown line {id}")))
        })
        .collect()
}

fn synth(a: SynthArgs) -> Outcome {
    let case = load_case(&a.case)?;
    if !(0.0..1.0).contains(&a.base_level) {
        return Err(Failure::Input(format!("base_level must lie in [0, 1), got {}", a.base_level)));
    }
    let cfg = ScoreConfig {
        seed: a.seed,
        peak_hours: (a.peak_start, a.peak_end),
        base_level: a.base_level,
        safe_lines: line_indices(&case, &a.safe)?,
        hot_lines: line_indices(&case, &a.hot)?,
    };
    let scores = generate_synthetic_scores(&case, &cfg);
    let csv = write_scores_csv(&case, &scores);
    match a.out {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn binomial_prefix(n: u64, k: u64) -> u64 {
    let mut total: u64 = 0;
    let mut c: u64 = 1;
    for i in 0..=k.min(n) {
        if i > 0 {
            c = c.saturating_mul(n - i + 1) / i;
        }
        total = total.saturating_add(c);
    }
    total
}

fn feasible_plans(case: &NetworkCase) -> Vec<Vec<Vec<bool>>> {
    let (t_n, nl) = (case.horizon, case.lines.len());
    let eps = case.params.risk_tolerance + 1e-12;
    let mut out = Vec::new();
    for mask in 0u64..1 << (t_n * nl) {
        let plan: Vec<Vec<bool>> = (0..t_n)
            .map(|t| (0..nl).map(|l| mask >> (t * nl + l) & 1 == 1).collect())
            .collect();
        let hourly: Vec<f64> = (0..t_n)
            .map(|t| (0..nl).filter(|&l| plan[t][l]).map(|l| case.fire_scores.get(l, t)).sum())
            .collect();
        let ok = match case.params.risk_intake_mode {
            RiskIntakeMode::Conservative => hourly.iter().all(|&h| h <= eps),
            RiskIntakeMode::Cumulative => hourly.iter().sum::<f64>() <= eps,
        };
        if ok {
            out.push(plan);
        }
    }
    out
}

fn validate(a: ValidateArgs) -> Outcome {
    let (mut case, strategy) = prepare(&a.case, &a.overrides)?;
    if let Some(h) = a.hours {
        if h == 0 {
            return Err(Failure::Input("--hours must be at least 1".into()));
        }
        case = truncate_horizon(&case, h);
        case.validate()?;
    }
    let n = case.uncertainty_count();
    if n > ENUMERATION_LIMIT {
        return Err(Failure::Input(format!(
            "{n} uncertain entries exceed the enumeration limit {ENUMERATION_LIMIT}; use --hours"
        )));
    }
    let r = run_ccg_with(&case, strategy)?;
    let plan = &r.plan.line_status;
    let wc = worst_case(&case, plan)?;
    let (_, oracle) = brute_force_worst_case(&case, plan)?;
    let tol = 1e-6 * (1.0 + oracle.abs());
    let mut ok = (wc.cost - oracle).abs() <= tol;
    println!("worst case: subproblem {:.6} enumeration {:.6} {}", wc.cost, oracle, verdict((wc.cost - oracle).abs() <= tol));

    let bits = case.horizon * case.lines.len();
    let vertices = binomial_prefix(n as u64, case.params.budget as u64);
    let evaluations = if bits < 63 { (1u64 << bits).saturating_mul(vertices) } else { u64::MAX };
    if bits <= 24 && evaluations <= a.max_evaluations {
        let best = feasible_plans(&case)
            .iter()
            .map(|p| robust_objective(&case, p))
            .collect::<Result<Vec<f64>, _>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let good = (r.upper_bound - best).abs() <= 1e-6 * (1.0 + best.abs());
        ok &= good;
        println!("robust optimum: ccg {:.6} enumeration {:.6} {}", r.upper_bound, best, verdict(good));
    } else {
        println!("robust optimum: skipped, {bits} line-hours and {vertices} vertices are too many to enumerate");
    }
    println!("ccg status {}, gap {:.3e}", status_name(r.trace.status), r.gap());
    if ok {
        Ok(())
    } else {
        Err(Failure::Unconverged)
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISMATCH"
    }
}

fn parse_layout(s: &str) -> Result<Siting, Failure> {
    let (name, rest) = s
        .split_once('=')
        .ok_or_else(|| Failure::Input(format!("layout `{s}` must look like name=bus:mw,...")))?;
    let mut sites = Vec::new();
    for part in rest.split(',') {
        let (bus, mw) = part
            .split_once(':')
            .ok_or_else(|| Failure::Input(format!("site `{part}` must look like bus:mw")))?;
        let mw: f64 = mw.trim().parse().map_err(|_| Failure::Input(format!("bad MW value in `{part}`")))?;
        sites.push((bus.trim().to_string(), mw));
    }
    Ok(Siting {
        name: name.to_string(),
        sites,
    })
}

fn siting(a: SitingArgs) -> Outcome {
    let o = a.overrides.resolve()?;
    let mut case = load_case(&a.case)?;
    let deviation = o.deviation.unwrap_or(0.0);
    let without_deviation = Overrides { deviation: None, ..o };
    without_deviation.apply(&mut case)?;
    let layouts = a.layouts.iter().map(|s| parse_layout(s)).collect::<Result<Vec<_>, _>>()?;
    let rows = compare_solar_siting(&case, a.total, &layouts, deviation)?;
    let table = siting_csv(&rows);
    match a.out {
        Some(p) => std::fs::write(p, &table)?,
        None => print!("{table}"),
    }
    if rows.iter().all(|r| r.status == CcgStatus::Converged) {
        Ok(())
    } else {
        Err(Failure::Unconverged)
    }
}
