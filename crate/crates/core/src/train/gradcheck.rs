//! Central finite-difference verification of [`backward`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{predict, Architecture, Model, Widths};
use crate::tensor::Tensor;
use crate::train::backward;

pub const DEFAULT_STEP: f64 = 1e-5;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// Location of a scalar parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamEntry {
    pub name: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Largest `|analytic - numeric|` over all entries.
    pub max_abs_error: f64,
    /// Entry with the largest relative error.
    pub worst: Option<ParamEntry>,
    pub checked: usize,
    pub tolerance: f64,
    pub passed: bool,
}

impl GradCheckReport {
    /// The worst entry, only when the check failed.
    pub fn offending(&self) -> Option<&ParamEntry> {
        if self.passed {
            None
        } else {
            self.worst.as_ref()
        }
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12)
}

fn predictions(model: &Model, inputs: &[Vec<f64>]) -> Result<Vec<f64>> {
    inputs.iter().map(|x| predict(model, x)).collect()
}

/// `L(plus) - L(minus)` for the MSE loss, evaluated as
/// `mean((p+ - p-) * (p+ + p- - 2t))` so the two losses never cancel.
fn loss_difference(plus: &[f64], minus: &[f64], targets: &[f64]) -> f64 {
    let n = targets.len() as f64;
    plus.iter()
        .zip(minus)
        .zip(targets)
        .map(|((p, m), t)| (p - m) * ((p - t) + (m - t)))
        .sum::<f64>()
        / n
}

/// Compares the analytic batch gradient with central differences for every
/// scalar parameter. Never mutates `model`.
pub fn gradient_check(
    model: &Model,
    inputs: &[Vec<f64>],
    targets: &[f64],
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    if inputs.len() != targets.len() {
        return Err(crate::error::Error::shape("batch", &[targets.len()], &[inputs.len()]));
    }
    let analytic = backward(model, inputs, targets)?.grads;
    gradient_check_against(model, inputs, targets, &analytic, step, tolerance)
}

/// Like [`gradient_check`] but against caller-supplied analytic gradients.
pub fn gradient_check_against(
    model: &Model,
    inputs: &[Vec<f64>],
    targets: &[f64],
    analytic: &[Tensor],
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport> {
    let names = model.parameter_names();
    let entries: Vec<(usize, usize)> = model
        .parameters()
        .iter()
        .enumerate()
        .flat_map(|(p, t)| (0..t.len()).map(move |i| (p, i)))
        .collect();

    let numeric: Vec<f64> = entries
        .par_iter()
        .map_init(
            || model.clone(),
            |probe, &(p, i)| -> Result<f64> {
                let original = probe.parameters()[p].data()[i];
                probe.parameters_mut()[p].data_mut()[i] = original + step;
                let plus = predictions(probe, inputs)?;
                probe.parameters_mut()[p].data_mut()[i] = original - step;
                let minus = predictions(probe, inputs)?;
                probe.parameters_mut()[p].data_mut()[i] = original;
                Ok(loss_difference(&plus, &minus, targets) / (2.0 * step))
            },
        )
        .collect::<Result<_>>()?;

    let mut max_rel_error = 0.0;
    let mut max_abs_error: f64 = 0.0;
    let mut worst = None;
    for (&(p, i), &n) in entries.iter().zip(&numeric) {
        let a = analytic[p].data()[i];
        max_abs_error = max_abs_error.max((a - n).abs());
        let err = relative_error(a, n);
        if worst.is_none() || err > max_rel_error {
            max_rel_error = err;
            worst = Some(ParamEntry {
                name: names[p].clone(),
                index: i,
                analytic: a,
                numeric: n,
            });
        }
    }
    Ok(GradCheckReport {
        max_rel_error,
        max_abs_error,
        worst,
        checked: entries.len(),
        tolerance,
        passed: max_rel_error < tolerance,
    })
}

/// The small proposed network used for gradient checks: filters 4/8/16,
/// 8 units per BiLSTM direction, window 8.
pub fn reduced_model(seed: u64) -> Result<Model> {
    Model::build(Architecture::Proposed, 8, Widths::REDUCED, seed)
}

/// Uniform random windows and targets in `[0, 1)`.
pub fn random_batch(window: usize, size: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = (0..size)
        .map(|_| (0..window).map(|_| rng.random::<f64>()).collect())
        .collect();
    let targets = (0..size).map(|_| rng.random::<f64>()).collect();
    (inputs, targets)
}
