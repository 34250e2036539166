//! Machine-readable run artifacts: the schedule document, the frontier and
//! points tables, and the per-window latency breakdown.
//!
//! Numbers in the delimited tables are printed with 12 significant digits so
//! repeated runs diff byte-for-byte.

use crate::costmodel::{scenario_windows, CostError, CostProvider, CostReport};
use crate::hardware::{McmSpec, NopGraph};
use crate::schedtree::FullSchedule;
use crate::search::ParetoPoint;
use crate::workload::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// 12-significant-digit scientific notation, byte-stable.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub const POINTS_HEADER: &str = "latency_s,energy_j,edp_js,schedule_id";

/// Serialize Pareto points (or the whole candidate pool) as delimited text.
pub fn points_to_csv(points: &[ParetoPoint]) -> String {
    let mut out = String::from(POINTS_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(p.latency),
            fmt_sig(p.energy),
            fmt_sig(p.latency * p.energy),
            p.schedule_id
        ));
    }
    out
}

/// Parse a points table back.
pub fn points_from_csv(text: &str) -> Result<Vec<ParetoPoint>, ArtifactError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == POINTS_HEADER => {}
        other => {
            return Err(ArtifactError::Parse(format!(
                "expected header `{POINTS_HEADER}`, found {other:?}"
            )))
        }
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(ArtifactError::Parse(format!(
                "line {}: expected 4 fields",
                n + 2
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64, ArtifactError> {
            s.parse::<f64>()
                .map_err(|e| ArtifactError::Parse(format!("line {}: {what}: {e}", n + 2)))
        };
        out.push(ParetoPoint {
            latency: parse(fields[0], "latency")?,
            energy: parse(fields[1], "energy")?,
            schedule_id: fields[3].to_string(),
        });
    }
    Ok(out)
}

/// Schedule document (JSON).
pub fn schedule_to_json(full: &FullSchedule) -> String {
    let mut s = serde_json::to_string_pretty(full).expect("schedule serialization");
    s.push('\n');
    s
}

pub fn schedule_from_json(text: &str) -> Result<FullSchedule, ArtifactError> {
    serde_json::from_str(text).map_err(|e| ArtifactError::Parse(e.to_string()))
}

/// Cost report document (JSON).
pub fn report_to_json(report: &CostReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization");
    s.push('\n');
    s
}

/// The per-window latency breakdown: one row per model holding its own
/// pipeline latency in each window, its ideal (sum of own latencies) and
/// cumulative completion time, plus footer rows with the window latencies
/// and per-window layer counts.
pub fn breakdown_csv(
    full: &FullSchedule,
    sc: &Scenario,
    mcm: &McmSpec,
    g: &NopGraph,
    provider: &dyn CostProvider,
    report: &CostReport,
) -> Result<String, ArtifactError> {
    let windows = scenario_windows(full, sc, mcm, g, provider)?;
    let win_ids: Vec<usize> = windows.iter().map(|&(w, _)| w).collect();

    let mut out = String::from("model");
    for w in &win_ids {
        out.push_str(&format!(",W{w}"));
    }
    out.push_str(",ideal_s,total_s,layers\n");

    for (m, model) in sc.models.iter().enumerate() {
        let mut ideal = 0.0f64;
        out.push_str(&model.name);
        for (_, wout) in &windows {
            let own = wout
                .per_model
                .iter()
                .find(|&&(mm, _)| mm == m)
                .map(|&(_, l)| l)
                .unwrap_or(0.0);
            ideal += own;
            out.push_str(&format!(",{}", fmt_sig(own)));
        }
        out.push_str(&format!(
            ",{},{},{}\n",
            fmt_sig(ideal),
            fmt_sig(report.per_model[m].1),
            model.layers.len()
        ));
    }

    out.push_str("window");
    for (_, wout) in &windows {
        out.push_str(&format!(",{}", fmt_sig(wout.latency)));
    }
    out.push_str(&format!(
        ",,{},{}\n",
        fmt_sig(report.latency),
        sc.total_layers()
    ));

    out.push_str("layers");
    let mut total_layers = 0usize;
    for w in &full.windows {
        let n: usize = w
            .entries
            .iter()
            .flat_map(|e| e.segments.iter())
            .map(|&(s, e)| e - s)
            .sum();
        total_layers += n;
        out.push_str(&format!(",{n}"));
    }
    out.push_str(&format!(",,,{total_layers}\n"));
    Ok(out)
}
