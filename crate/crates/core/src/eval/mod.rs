//! Error metrics, model evaluation on a test split, and comparison reports.

mod metrics;
mod report;

use std::io::Write;

use crate::data::{Scaler, WindowedDataset};
use crate::error::{Error, Result};
use crate::model::{predict_batch, Model};

pub use metrics::{mae, mape, mse, rmse, ErrorMetrics, EvalSeries, Scale};
pub use report::{
    best_index, compare, from_json, render_table, to_json, Comparison, MetricsReport,
    ModelMetrics, RunMetadata,
};

/// Metrics for one model plus the per-point forecasts they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub metrics: ModelMetrics,
    pub actual_mw: Vec<f64>,
    pub forecast_mw: Vec<f64>,
}

impl Evaluation {
    /// `index,actual_mw,forecast_mw`
    pub fn write_points_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "index,actual_mw,forecast_mw")?;
        for (i, (a, f)) in self.actual_mw.iter().zip(&self.forecast_mw).enumerate() {
            writeln!(out, "{i},{a},{f}")?;
        }
        Ok(())
    }
}

/// One-step predictions over every test window. MSE/RMSE/MAE are reported
/// on the scaled values and on MW; MAPE on MW.
pub fn evaluate(model: &Model, test: &WindowedDataset, scaler: &Scaler) -> Result<Evaluation> {
    if test.window != model.window() {
        return Err(Error::shape("test window", &[model.window()], &[test.window]));
    }
    if let Some(own) = model.scaler() {
        if own != scaler {
            return Err(Error::InvalidParameter(format!(
                "scaler ({}, {}) differs from the model's ({}, {})",
                scaler.x_min(),
                scaler.x_max(),
                own.x_min(),
                own.x_max()
            )));
        }
    }
    let forecast = predict_batch(model, &test.inputs)?;
    let normalized = EvalSeries::new(test.targets.clone(), forecast.clone(), Scale::Normalized)?;
    let actual_mw = scaler.inverse_all(&test.targets);
    let forecast_mw = scaler.inverse_all(&forecast);
    let mw = EvalSeries::new(actual_mw.clone(), forecast_mw.clone(), Scale::Mw)?;
    Ok(Evaluation {
        metrics: ModelMetrics {
            model: model.architecture().display_name().to_string(),
            normalized: ErrorMetrics::of(&normalized),
            mw: ErrorMetrics::of(&mw),
            mape_pct: mape(&mw)?,
        },
        actual_mw,
        forecast_mw,
    })
}
