use serde::{Deserialize, Serialize};

use crate::data::TimeSeries;
use crate::error::{Error, Result};

/// Min-max scaler fitted on the training split.
///
/// Values outside the fitted range map outside `[0, 1]`; nothing is clipped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    x_min: f64,
    x_max: f64,
}

impl Scaler {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidParameter(format!(
                "scaler needs finite x_min < x_max, got ({x_min}, {x_max})"
            )));
        }
        Ok(Scaler { x_min, x_max })
    }

    /// Fits on raw values. Fails on an empty or constant slice.
    pub fn fit(values: &[f64]) -> Result<Self> {
        let first = *values.first().ok_or(Error::EmptySeries)?;
        let (lo, hi) = values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if hi == lo {
            return Err(Error::DegenerateRange { value: lo });
        }
        Scaler::new(lo, hi)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn range(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn transform(&self, x: f64) -> f64 {
        (x - self.x_min) / (self.x_max - self.x_min)
    }

    pub fn inverse_transform(&self, s: f64) -> f64 {
        s * (self.x_max - self.x_min) + self.x_min
    }

    pub fn transform_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.transform(x)).collect()
    }

    pub fn inverse_all(&self, ss: &[f64]) -> Vec<f64> {
        ss.iter().map(|&s| self.inverse_transform(s)).collect()
    }
}

/// Fits a scaler on the values of a (training) series.
pub fn fit_scaler(train: &TimeSeries) -> Result<Scaler> {
    Scaler::fit(train.values())
}
