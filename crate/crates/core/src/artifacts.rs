//! Plan, trace and report files. Everything written here is a function of
//! the inputs only, so repeated runs produce identical bytes.

use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::{Path, PathBuf};

use crate::case::NetworkCase;
use crate::ccg::{CcgResult, CcgTrace};
use crate::realization::UncertaintyRealization;
use crate::risk::{robust_risk_report, RiskReport, SitingRow};
use crate::sweep::{MonotoneSummary, SweepRow};

fn bits(m: &[Vec<bool>]) -> Vec<Vec<u8>> {
    m.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect()
}

fn realization_json(case: &NetworkCase, r: &UncertaintyRealization) -> serde_json::Value {
    let demand_buses: Vec<&str> = case.demands.iter().map(|d| case.buses[d.bus].label.as_str()).collect();
    let solar: Vec<&str> = case.solar.iter().map(|s| s.label.as_str()).collect();
    json!({
        "demand_buses": demand_buses,
        "solar_units": solar,
        "demand_up": bits(&r.demand_up),
        "demand_down": bits(&r.demand_down),
        "solar_down": bits(&r.solar_down),
        "solar_up": bits(&r.solar_up),
        "demand": r.demand,
        "solar": r.solar,
    })
}

/// The chosen plan, its bounds and both dispatches as one JSON document.
pub fn plan_json(case: &NetworkCase, result: &CcgResult) -> String {
    let plan = &result.plan;
    let report = robust_risk_report(case, result);
    let v = json!({
        "status": result.trace.status,
        "objective": result.upper_bound,
        "lower_bound": result.lower_bound,
        "upper_bound": result.upper_bound,
        "gap": result.gap(),
        "iterations": result.trace.iterations.len(),
        "risk_tolerance": case.params.risk_tolerance,
        "risk_intake_mode": case.params.risk_intake_mode,
        "budget": case.params.budget,
        "lines": case.lines.iter().map(|l| &l.label).collect::<Vec<_>>(),
        "generators": case.generators.iter().map(|g| &g.label).collect::<Vec<_>>(),
        "line_status": bits(&plan.line_status),
        "scores": plan.scores,
        "energized_percent": report.energized_percent,
        "served_percent_worst_case": report.served_percent,
        "nominal_dispatch": plan.dispatch,
        "worst_case": realization_json(case, &result.worst_case),
        "worst_case_dispatch": result.worst_dispatch,
    });
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

/// One JSON record per iteration.
pub fn trace_jsonl(case: &NetworkCase, trace: &CcgTrace) -> String {
    let mut out = String::new();
    for it in &trace.iterations {
        let v = json!({
            "iteration": it.iteration,
            "lower_bound": it.lower_bound,
            "upper_bound": it.upper_bound,
            "gap": it.gap,
            "worst_cost": it.worst_cost,
            "master_nodes": it.master_nodes,
            "line_status": bits(&it.line_status),
            "realization": realization_json(case, &it.realization),
        });
        out.push_str(&serde_json::to_string(&v).expect("json"));
        out.push('\n');
    }
    out
}

fn csv_string<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

#[derive(Serialize)]
struct LineRiskRow<'a> {
    line_id: &'a str,
    risk_of_operation: f64,
    energized_hours: usize,
}

pub fn line_risk_csv(report: &RiskReport) -> String {
    let rows: Vec<LineRiskRow> = report
        .line_labels
        .iter()
        .enumerate()
        .map(|(l, label)| LineRiskRow {
            line_id: label,
            risk_of_operation: report.line_risk[l],
            energized_hours: report.line_status.iter().filter(|r| r[l]).count(),
        })
        .collect();
    csv_string(&rows)
}

/// Hour-by-line status table, 1 = energized.
pub fn line_status_csv(report: &RiskReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["hour".to_string()];
    header.extend(report.line_labels.iter().cloned());
    w.write_record(&header).expect("in-memory csv");
    for (t, row) in report.line_status.iter().enumerate() {
        let mut rec = vec![(t + 1).to_string()];
        rec.extend(row.iter().map(|&b| (b as u8).to_string()));
        w.write_record(&rec).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

pub fn summary_json(report: &RiskReport) -> String {
    serde_json::to_string_pretty(report).expect("json") + "\n"
}

fn write(dir: &Path, name: &str, text: &str, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    out.push(p);
    Ok(())
}

/// Writes `plan.json`, `trace.jsonl`, `line_risk.csv`, `line_status.csv`
/// and `summary.json` into `dir`.
pub fn write_solve_artifacts(dir: &Path, case: &NetworkCase, result: &CcgResult) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let report = robust_risk_report(case, result);
    let mut out = Vec::new();
    write(dir, "plan.json", &plan_json(case, result), &mut out)?;
    write(dir, "trace.jsonl", &trace_jsonl(case, &result.trace), &mut out)?;
    write(dir, "line_risk.csv", &line_risk_csv(&report), &mut out)?;
    write(dir, "line_status.csv", &line_status_csv(&report), &mut out)?;
    write(dir, "summary.json", &summary_json(&report), &mut out)?;
    Ok(out)
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    axis: &'a str,
    value: f64,
    status: &'a str,
    objective: Option<f64>,
    lower_bound: Option<f64>,
    gap: Option<f64>,
    iterations: Option<usize>,
    energized_percent: Option<f64>,
    served_percent: Option<f64>,
    error: Option<&'a str>,
}

/// Tidy CSV, one row per grid point.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let rows: Vec<SweepCsvRow> = rows
        .iter()
        .map(|r| SweepCsvRow {
            axis: r.axis.name(),
            value: r.value,
            status: &r.status,
            objective: r.objective,
            lower_bound: r.lower_bound,
            gap: r.gap,
            iterations: r.iterations,
            energized_percent: r.energized_percent,
            served_percent: r.served_percent,
            error: r.error.as_deref(),
        })
        .collect();
    csv_string(&rows)
}

#[derive(Deserialize)]
struct SweepCsvRecord {
    axis: String,
    value: f64,
    status: String,
    objective: Option<f64>,
    lower_bound: Option<f64>,
    gap: Option<f64>,
    iterations: Option<usize>,
    energized_percent: Option<f64>,
    served_percent: Option<f64>,
    error: Option<String>,
}

/// Reads a table written by [`sweep_csv`]; rows are indexed in file order.
pub fn sweep_rows_from_csv(text: &str) -> Result<Vec<SweepRow>, String> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (index, rec) in rdr.deserialize::<SweepCsvRecord>().enumerate() {
        let r = rec.map_err(|e| e.to_string())?;
        rows.push(SweepRow {
            index,
            axis: r.axis.parse()?,
            value: r.value,
            status: r.status,
            objective: r.objective,
            lower_bound: r.lower_bound,
            gap: r.gap,
            iterations: r.iterations,
            energized_percent: r.energized_percent,
            served_percent: r.served_percent,
            error: r.error,
        });
    }
    Ok(rows)
}

pub fn monotonicity_json(summary: &MonotoneSummary) -> String {
    serde_json::to_string_pretty(summary).expect("json") + "\n"
}

pub fn siting_csv(rows: &[SitingRow]) -> String {
    csv_string(rows)
}
