//! Backpropagation, Adam, the mini-batch training loop and gradient checks.

mod adam;
mod backprop;
mod config;
mod gradcheck;
mod loss;

use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::WindowedDataset;
use crate::error::{Error, Result};
use crate::model::Model;

pub use adam::{adam_step, adam_step_model, AdamState};
pub use backprop::{backward, zero_gradients, BatchGradients};
pub use config::TrainConfig;
pub use gradcheck::{
    gradient_check, gradient_check_against, random_batch, reduced_model, relative_error,
    GradCheckReport, ParamEntry, DEFAULT_STEP, DEFAULT_TOLERANCE,
};
pub use loss::mse_loss;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainHistory {
    /// Mean training loss of each epoch.
    pub losses: Vec<f64>,
    pub seconds: Vec<f64>,
    /// CRC-32 of the final parameters' little-endian bytes.
    pub checksum: u32,
}

impl TrainHistory {
    pub fn final_loss(&self) -> Option<f64> {
        self.losses.last().copied()
    }

    /// `epoch,loss,seconds`, epochs numbered from 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,loss,seconds")?;
        for (i, (loss, secs)) in self.losses.iter().zip(&self.seconds).enumerate() {
            writeln!(out, "{},{},{}", i + 1, loss, secs)?;
        }
        Ok(())
    }
}

pub fn parameter_checksum(model: &Model) -> u32 {
    let mut hasher = crc32fast::Hasher::new();
    for t in model.parameters() {
        for v in t.data() {
            hasher.update(&v.to_le_bytes());
        }
    }
    hasher.finalize()
}

pub fn train(model: Model, data: &WindowedDataset, config: &TrainConfig) -> Result<(Model, TrainHistory)> {
    train_with(model, data, config, |_, _| {})
}

/// Mini-batch Adam on the MSE loss. `on_epoch(epoch, mean_loss)` is called
/// after every epoch (1-based).
///
/// Every epoch visits each window once, in an order drawn from a generator
/// seeded with `config.seed` when shuffling is on. A trailing partial batch
/// is used as-is.
pub fn train_with(
    mut model: Model,
    data: &WindowedDataset,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(Model, TrainHistory)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptySeries);
    }
    if data.window != model.window() {
        return Err(Error::shape("dataset window", &[model.window()], &[data.window]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut state = AdamState::for_model(&model);
    let mut losses = Vec::with_capacity(config.epochs);
    let mut seconds = Vec::with_capacity(config.epochs);
    let mut inputs = Vec::with_capacity(config.batch_size);
    let mut targets = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for (batch, idx) in order.chunks(config.batch_size).enumerate() {
            inputs.clear();
            targets.clear();
            for &i in idx {
                inputs.push(data.inputs[i].clone());
                targets.push(data.targets[i]);
            }
            let bg = backward(&model, &inputs, &targets)?;
            if !bg.loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch + 1,
                });
            }
            total += bg.loss * idx.len() as f64;
            adam_step_model(&mut model, &bg.grads, &mut state, config)?;
        }
        let mean = total / data.len() as f64;
        losses.push(mean);
        seconds.push(started.elapsed().as_secs_f64());
        on_epoch(epoch, mean);
    }

    let checksum = parameter_checksum(&model);
    Ok((
        model,
        TrainHistory {
            losses,
            seconds,
            checksum,
        },
    ))
}
