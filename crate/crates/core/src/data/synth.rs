//! Deterministic synthetic daily demand used for demos and regression runs.

use std::f64::consts::TAU;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::TimeSeries;

/// Shape of the synthetic signal before it is rescaled to `[low_mw, high_mw]`.
#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub start: NaiveDate,
    pub days: usize,
    pub seed: u64,
    pub annual_amplitude: f64,
    pub weekly_amplitude: f64,
    /// Total rise of the linear trend over the whole series.
    pub trend: f64,
    pub noise_std: f64,
    pub low_mw: f64,
    pub high_mw: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            start: NaiveDate::from_ymd_opt(2016, 1, 1).expect("valid date"),
            days: 2190,
            seed: 42,
            annual_amplitude: 1.0,
            weekly_amplitude: 0.35,
            trend: 0.6,
            noise_std: 0.05,
            low_mw: 2900.0,
            high_mw: 3700.0,
        }
    }
}

/// Annual sine + weekly sine + linear trend + seeded Gaussian noise,
/// affinely mapped so the series spans exactly `[low_mw, high_mw]`.
pub fn synthetic_series(cfg: &SynthConfig) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std.max(0.0)).expect("valid std");
    let n = cfg.days.max(1);
    let raw: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            cfg.annual_amplitude * (TAU * t / 365.0).sin()
                + cfg.weekly_amplitude * (TAU * t / 7.0).sin()
                + cfg.trend * t / n as f64
                + noise.sample(&mut rng)
        })
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let values = raw
        .iter()
        .map(|&v| cfg.low_mw + (v - lo) / span * (cfg.high_mw - cfg.low_mw))
        .collect();
    TimeSeries::from_values(cfg.start, values)
}
