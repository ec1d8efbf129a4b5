//! Comparison tables and their JSON form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{ErrorMetrics, Scale};
use crate::error::{Error, Result};

/// One model's metrics: MSE/RMSE/MAE on both scales, MAPE on MW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub model: String,
    pub normalized: ErrorMetrics,
    pub mw: ErrorMetrics,
    pub mape_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub window: usize,
    pub horizon: usize,
    pub seed: u64,
    pub epochs: usize,
}

/// Row of the JSON document. The headline MSE/RMSE/MAE are on `scale`
/// (normalized); the MW-scale values ride along under `mw`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct JsonRow {
    model: String,
    mse: f64,
    rmse: f64,
    mae: f64,
    mape_pct: f64,
    scale: Scale,
    mw: ErrorMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct JsonReport {
    rows: Vec<JsonRow>,
    best: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<RunMetadata>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<ModelMetrics>,
    pub metadata: Option<RunMetadata>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub table: String,
    pub json: String,
    /// Index of the lowest-MAPE row.
    pub best: usize,
}

/// Index of the lowest MAPE, first one on ties.
pub fn best_index(rows: &[ModelMetrics]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .min_by(|a, b| a.1.mape_pct.total_cmp(&b.1.mape_pct))
        .map(|(i, _)| i)
}

/// Fixed-width table: `Model | MSE | RMSE | MAE | MAPE(%)`, four decimals,
/// best row marked with `*`.
pub fn render_table(rows: &[ModelMetrics]) -> String {
    let best = best_index(rows);
    let name_width = rows
        .iter()
        .map(|r| r.model.len())
        .chain(std::iter::once("Model".len()))
        .max()
        .unwrap_or(5);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_width$}  {:>10}  {:>10}  {:>10}  {:>10}",
        "Model", "MSE", "RMSE", "MAE", "MAPE(%)"
    );
    for (i, r) in rows.iter().enumerate() {
        let mark = if Some(i) == best { " *" } else { "" };
        let _ = writeln!(
            out,
            "{:<name_width$}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}{mark}",
            r.model, r.normalized.mse, r.normalized.rmse, r.normalized.mae, r.mape_pct
        );
    }
    out
}

pub fn to_json(report: &MetricsReport) -> Result<String> {
    let best = best_index(&report.rows)
        .ok_or_else(|| Error::InvalidParameter("report has no rows".into()))?;
    let doc = JsonReport {
        rows: report
            .rows
            .iter()
            .map(|r| JsonRow {
                model: r.model.clone(),
                mse: r.normalized.mse,
                rmse: r.normalized.rmse,
                mae: r.normalized.mae,
                mape_pct: r.mape_pct,
                scale: Scale::Normalized,
                mw: r.mw,
            })
            .collect(),
        best: report.rows[best].model.clone(),
        metadata: report.metadata.clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<MetricsReport> {
    let doc: JsonReport = serde_json::from_str(text)?;
    Ok(MetricsReport {
        rows: doc
            .rows
            .into_iter()
            .map(|r| ModelMetrics {
                model: r.model,
                normalized: ErrorMetrics {
                    mse: r.mse,
                    rmse: r.rmse,
                    mae: r.mae,
                },
                mw: r.mw,
                mape_pct: r.mape_pct,
            })
            .collect(),
        metadata: doc.metadata,
    })
}

/// Builds the text table and JSON document for a set of rows.
pub fn compare(rows: &[ModelMetrics], metadata: Option<RunMetadata>) -> Result<Comparison> {
    let report = MetricsReport {
        rows: rows.to_vec(),
        metadata,
    };
    let json = to_json(&report)?;
    Ok(Comparison {
        table: render_table(rows),
        json,
        best: best_index(rows).expect("non-empty, checked by to_json"),
    })
}
