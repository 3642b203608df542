//! Case files (JSON) and fire-score tables (CSV).

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

use crate::case::{
    segmentize_quadratic, Bus, DemandPoint, FireScores, Generator, Line, NetworkCase, RobustParams, Segment,
    SolarUnit,
};
use crate::error::CaseError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Label {
    Int(i64),
    Text(String),
}

impl Label {
    fn text(&self) -> String {
        match self {
            Label::Int(v) => v.to_string(),
            Label::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Profile {
    Constant(f64),
    Series(Vec<f64>),
}

impl Profile {
    fn expand(&self, horizon: usize) -> Vec<f64> {
        match self {
            Profile::Constant(v) => vec![*v; horizon],
            Profile::Series(v) => v.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusFile {
    id: Label,
    #[serde(default)]
    reference: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    id: Label,
    from: Label,
    to: Label,
    reactance: f64,
    limit: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CostFile {
    Segments(Vec<Segment>),
    Quadratic { a: f64, b: f64, c: f64, segments: usize },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorFile {
    id: Label,
    bus: Label,
    p_min: f64,
    p_max: f64,
    cost: CostFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolarFile {
    id: Label,
    bus: Label,
    nominal: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deviation: Option<Profile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandFile {
    bus: Label,
    nominal: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deviation: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub line_id: String,
    /// 1-based hour.
    pub hour: usize,
    pub score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ScoresFile {
    Path(String),
    Rows(Vec<ScoreRowFile>),
}

#[derive(Debug, Serialize, Deserialize)]
struct ScoreRowFile {
    line_id: Label,
    hour: usize,
    score: f64,
}

fn default_base() -> f64 {
    100.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    #[serde(default = "default_base")]
    base_mva: f64,
    horizon: usize,
    buses: Vec<BusFile>,
    lines: Vec<LineFile>,
    generators: Vec<GeneratorFile>,
    #[serde(default)]
    solar: Vec<SolarFile>,
    demands: Vec<DemandFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fire_scores: Option<ScoresFile>,
    #[serde(default)]
    robust_params: RobustParams,
}

fn parse_err(msg: impl Into<String>) -> CaseError {
    CaseError::Parse(msg.into())
}

/// Reads and validates a case file. A `fire_scores` string is resolved
/// relative to the file's directory.
pub fn load_case(path: impl AsRef<Path>) -> Result<NetworkCase, CaseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    parse_case(&text, dir)
}

/// Parses a case document; relative score paths resolve against `dir`.
pub fn parse_case(text: &str, dir: &Path) -> Result<NetworkCase, CaseError> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let horizon = file.horizon;

    let mut bus_index = HashMap::new();
    let mut buses = Vec::with_capacity(file.buses.len());
    let mut any_ref = false;
    for b in &file.buses {
        let label = b.id.text();
        if bus_index.insert(label.clone(), buses.len()).is_some() {
            return Err(CaseError::Invalid {
                entity: format!("bus {label}"),
                message: "duplicate id".into(),
            });
        }
        any_ref |= b.reference;
        buses.push(Bus {
            label,
            reference: b.reference,
        });
    }
    if !any_ref {
        if let Some(b) = buses.first_mut() {
            b.reference = true;
        }
    }
    let bus = |l: &Label, who: &str| -> Result<usize, CaseError> {
        bus_index.get(&l.text()).copied().ok_or_else(|| CaseError::Invalid {
            entity: who.to_string(),
            message: format!("references unknown bus {}", l.text()),
        })
    };

    let mut lines = Vec::new();
    for l in &file.lines {
        let who = format!("line {}", l.id.text());
        lines.push(Line {
            label: l.id.text(),
            from: bus(&l.from, &who)?,
            to: bus(&l.to, &who)?,
            reactance: l.reactance,
            limit: l.limit,
        });
    }

    let mut generators = Vec::new();
    for g in &file.generators {
        let who = format!("generator {}", g.id.text());
        let segments = match &g.cost {
            CostFile::Segments(s) => s.clone(),
            CostFile::Quadratic { a, b, c, segments } => segmentize_quadratic(*a, *b, *c, g.p_min, g.p_max, *segments)
                .map_err(|e| match e {
                    CaseError::Invalid { message, .. } => CaseError::Invalid { entity: who.clone(), message },
                    other => other,
                })?,
        };
        generators.push(Generator {
            label: g.id.text(),
            bus: bus(&g.bus, &who)?,
            p_min: g.p_min,
            p_max: g.p_max,
            segments,
        });
    }

    let mut solar = Vec::new();
    for s in &file.solar {
        let who = format!("solar {}", s.id.text());
        let nominal = s.nominal.expand(horizon);
        let deviation = match &s.deviation {
            Some(d) => d.expand(horizon),
            None => vec![0.0; nominal.len()],
        };
        solar.push(SolarUnit {
            label: s.id.text(),
            bus: bus(&s.bus, &who)?,
            nominal,
            deviation,
        });
    }

    let mut demands = Vec::new();
    for d in &file.demands {
        let nominal = d.nominal.expand(horizon);
        let deviation = match &d.deviation {
            Some(p) => p.expand(horizon),
            None => vec![0.0; nominal.len()],
        };
        demands.push(DemandPoint {
            bus: bus(&d.bus, "demand")?,
            nominal,
            deviation,
        });
    }

    let labels: Vec<String> = lines.iter().map(|l| l.label.clone()).collect();
    let fire_scores = match &file.fire_scores {
        None => FireScores::zeros(lines.len(), horizon),
        Some(ScoresFile::Path(p)) => read_scores_csv(dir.join(p), &labels, horizon)?,
        Some(ScoresFile::Rows(rows)) => {
            let rows: Vec<ScoreRow> = rows
                .iter()
                .map(|r| ScoreRow {
                    line_id: r.line_id.text(),
                    hour: r.hour,
                    score: r.score,
                })
                .collect();
            scores_from_rows(&rows, &labels, horizon)?
        }
    };

    let case = NetworkCase {
        base_mva: file.base_mva,
        horizon,
        buses,
        lines,
        generators,
        solar,
        demands,
        fire_scores,
        params: file.robust_params,
    };
    case.validate()?;
    Ok(case)
}

/// Serializes a case with explicit segments and inline scores.
pub fn case_to_json(case: &NetworkCase) -> String {
    let lbl = |b: usize| Label::Text(case.buses[b].label.clone());
    let file = CaseFile {
        base_mva: case.base_mva,
        horizon: case.horizon,
        buses: case
            .buses
            .iter()
            .map(|b| BusFile {
                id: Label::Text(b.label.clone()),
                reference: b.reference,
            })
            .collect(),
        lines: case
            .lines
            .iter()
            .map(|l| LineFile {
                id: Label::Text(l.label.clone()),
                from: lbl(l.from),
                to: lbl(l.to),
                reactance: l.reactance,
                limit: l.limit,
            })
            .collect(),
        generators: case
            .generators
            .iter()
            .map(|g| GeneratorFile {
                id: Label::Text(g.label.clone()),
                bus: lbl(g.bus),
                p_min: g.p_min,
                p_max: g.p_max,
                cost: CostFile::Segments(g.segments.clone()),
            })
            .collect(),
        solar: case
            .solar
            .iter()
            .map(|s| SolarFile {
                id: Label::Text(s.label.clone()),
                bus: lbl(s.bus),
                nominal: Profile::Series(s.nominal.clone()),
                deviation: Some(Profile::Series(s.deviation.clone())),
            })
            .collect(),
        demands: case
            .demands
            .iter()
            .map(|d| DemandFile {
                bus: lbl(d.bus),
                nominal: Profile::Series(d.nominal.clone()),
                deviation: Some(Profile::Series(d.deviation.clone())),
            })
            .collect(),
        fire_scores: Some(ScoresFile::Rows(
            score_rows(case)
                .into_iter()
                .map(|r| ScoreRowFile {
                    line_id: Label::Text(r.line_id),
                    hour: r.hour,
                    score: r.score,
                })
                .collect(),
        )),
        robust_params: case.params.clone(),
    };
    serde_json::to_string_pretty(&file).expect("case serializes")
}

/// Saves a case as JSON.
pub fn save_case(case: &NetworkCase, path: impl AsRef<Path>) -> Result<(), CaseError> {
    let path = path.as_ref();
    std::fs::write(path, case_to_json(case)).map_err(|source| CaseError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn score_rows(case: &NetworkCase) -> Vec<ScoreRow> {
    let mut rows = Vec::new();
    for (l, line) in case.lines.iter().enumerate() {
        for t in 0..case.horizon {
            rows.push(ScoreRow {
                line_id: line.label.clone(),
                hour: t + 1,
                score: case.fire_scores.get(l, t),
            });
        }
    }
    rows
}

fn scores_from_rows(rows: &[ScoreRow], labels: &[String], horizon: usize) -> Result<FireScores, CaseError> {
    let index: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut values = vec![vec![f64::NAN; horizon]; labels.len()];
    for r in rows {
        let Some(&l) = index.get(r.line_id.as_str()) else {
            return Err(parse_err(format!("fire score for unknown line {}", r.line_id)));
        };
        if r.hour == 0 || r.hour > horizon {
            return Err(parse_err(format!("fire score hour {} outside 1..={horizon}", r.hour)));
        }
        if !values[l][r.hour - 1].is_nan() {
            return Err(parse_err(format!("duplicate fire score for line {} hour {}", r.line_id, r.hour)));
        }
        values[l][r.hour - 1] = r.score;
    }
    for (l, row) in values.iter().enumerate() {
        if let Some(h) = row.iter().position(|v| v.is_nan()) {
            return Err(CaseError::Invalid {
                entity: format!("fire scores of line {}", labels[l]),
                message: format!("missing score for hour {}", h + 1),
            });
        }
    }
    Ok(FireScores { values })
}

/// Reads `line_id,hour,score` rows (hours 1-based).
pub fn read_scores_csv(path: impl AsRef<Path>, labels: &[String], horizon: usize) -> Result<FireScores, CaseError> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<ScoreRow>() {
        rows.push(rec.map_err(|e| parse_err(format!("{}: {e}", path.display())))?);
    }
    scores_from_rows(&rows, labels, horizon)
}

pub fn write_scores_csv(case: &NetworkCase, scores: &FireScores) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (l, line) in case.lines.iter().enumerate() {
        for t in 0..case.horizon {
            w.serialize(ScoreRow {
                line_id: line.label.clone(),
                hour: t + 1,
                score: scores.values[l][t],
            })
            .expect("in-memory csv");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}
