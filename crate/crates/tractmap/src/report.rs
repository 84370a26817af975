//! Report and mapping file formats.
//!
//! - Mapping files (`mapping.json`, `ground_truth.json`):
//!   `{"assignment": [...], "n_targets": M, ...}` where `assignment[i]` is
//!   the index in the full target tractography of the streamline source `i`
//!   maps to. Ground-truth files also carry `target_tract`, the indices of
//!   the homologous tract.
//! - Loss traces (`trace.csv`): `iteration,loss,normalized_loss,accepted`,
//!   one row per annealing iteration plus the initial state.
//! - Experiment reports (`report.csv`, `report.json`): one row per
//!   source/target pair with tract sizes, initial and final normalized loss
//!   and metric columns named `<metric>:<method>` such as `jaccard:init` or
//!   `jaccard:SA-1000`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tractmap_core::optim::TraceRecord;
use tractmap_core::Mapping;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFile {
    pub assignment: Vec<usize>,
    pub n_targets: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_tract: Option<Vec<usize>>,
}

impl MappingFile {
    pub fn mapping(&self) -> Result<Mapping> {
        Ok(Mapping::new(self.assignment.clone(), self.n_targets)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("$", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("mapping serializes");
        s.push('\n');
        s
    }
}

/// Index file accepted by `map --target-tract`: a bare array, or an object
/// with `target_tract` or `indices`.
pub fn parse_index_file(text: &str) -> Result<Vec<usize>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::json("$", e.to_string()))?;
    let (path, list) = match &v {
        Value::Array(_) => ("$", &v),
        Value::Object(o) => match (o.get("target_tract"), o.get("indices")) {
            (Some(l), _) => ("$.target_tract", l),
            (None, Some(l)) => ("$.indices", l),
            _ => {
                return Err(Error::json(
                    "$",
                    "expected key \"target_tract\" or \"indices\"",
                ))
            }
        },
        _ => return Err(Error::json("$", "expected an array or an object")),
    };
    serde_json::from_value(list.clone()).map_err(|e| Error::json(path, e.to_string()))
}

/// Loss trace as CSV.
pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::from("iteration,loss,normalized_loss,accepted\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.iteration, r.loss, r.normalized_loss, r.accepted
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub source_id: String,
    pub target_id: String,
    pub size_a: usize,
    pub size_b: usize,
    pub size_superset: usize,
    pub initial_normalized_loss: f64,
    pub final_normalized_loss: f64,
    /// `(column, value)` in column order, every value in `[0, 1]`.
    pub metrics: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub trace: Vec<TraceRecord>,
}

const FIXED_COLUMNS: [&str; 7] = [
    "source_id",
    "target_id",
    "size_a",
    "size_b",
    "size_superset",
    "normalized_loss:init",
    "normalized_loss:final",
];

/// Assembles a report, checking that all rows share the same metric
/// columns, sizes are positive and metrics lie in `[0, 1]`.
pub fn build_report(rows: Vec<ReportRow>, trace: Vec<TraceRecord>) -> Result<ExperimentReport> {
    let columns: Option<Vec<&str>> = rows
        .first()
        .map(|r| r.metrics.iter().map(|(k, _)| k.as_str()).collect());
    for row in &rows {
        if row.size_a == 0 || row.size_b == 0 || row.size_superset == 0 {
            return Err(Error::Input("report sizes must be positive".into()));
        }
        let names: Vec<&str> = row.metrics.iter().map(|(k, _)| k.as_str()).collect();
        if Some(&names) != columns.as_ref() {
            return Err(Error::Input(
                "report rows have different metric columns".into(),
            ));
        }
        if let Some((k, v)) = row.metrics.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            return Err(Error::Input(format!("metric {k} = {v} is outside [0, 1]")));
        }
    }
    Ok(ExperimentReport { rows, trace })
}

impl ExperimentReport {
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|c| c.to_string()).collect();
        if let Some(r) = self.rows.first() {
            cols.extend(r.metrics.iter().map(|(k, _)| k.clone()));
        }
        cols
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns()).expect("in-memory write");
        for r in &self.rows {
            let mut fields = vec![
                r.source_id.clone(),
                r.target_id.clone(),
                r.size_a.to_string(),
                r.size_b.to_string(),
                r.size_superset.to_string(),
                r.initial_normalized_loss.to_string(),
                r.final_normalized_loss.to_string(),
            ];
            fields.extend(r.metrics.iter().map(|(_, v)| v.to_string()));
            w.write_record(&fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut metrics = Map::new();
                for (k, v) in &r.metrics {
                    metrics.insert(k.clone(), json!(v));
                }
                json!({
                    "source_id": r.source_id,
                    "target_id": r.target_id,
                    "size_a": r.size_a,
                    "size_b": r.size_b,
                    "size_superset": r.size_superset,
                    "initial_normalized_loss": r.initial_normalized_loss,
                    "final_normalized_loss": r.final_normalized_loss,
                    "metrics": metrics,
                })
            })
            .collect();
        let trace: Vec<Value> = self
            .trace
            .iter()
            .map(|t| {
                json!({
                    "iteration": t.iteration,
                    "loss": t.loss,
                    "normalized_loss": t.normalized_loss,
                    "best_loss": t.best_loss,
                    "accepted": t.accepted,
                })
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&json!({ "rows": rows, "trace": trace }))
            .expect("report serializes");
        s.push('\n');
        s
    }
}
