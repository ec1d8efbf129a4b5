//! Reverse-mode differentiation of a [`Model`] under the MSE loss.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Layer, Model};
use crate::nn::{
    bilstm_backward, bilstm_forward_cached, conv1d_backward, conv1d_forward, dense_backward,
    dense_forward, lstm_backward, lstm_forward_cached, maxpool1d, maxpool1d_backward, relu,
    relu_backward, BiLstmCache, Direction, LstmCache,
};
use crate::tensor::Tensor;

/// Samples per work unit. Fixed so the summation order, and therefore the
/// result, does not depend on the thread count.
const CHUNK: usize = 8;

enum Cache {
    Conv(Tensor),
    Relu(Tensor),
    Pool(Vec<usize>, Vec<usize>),
    Lstm(Tensor, LstmCache),
    BiLstm(Tensor, BiLstmCache),
    Dense(Tensor),
}

fn forward_cached(model: &Model, window: &[f64]) -> Result<(f64, Vec<Cache>)> {
    let mut x = model.input_for(window)?;
    let mut caches = Vec::with_capacity(model.layers().len());
    for layer in model.layers() {
        let (out, cache) = match layer {
            Layer::Conv1d(p) => (conv1d_forward(&x, p)?, Cache::Conv(x)),
            Layer::Relu => (relu(&x), Cache::Relu(x)),
            Layer::MaxPool { size } => {
                let (out, argmax) = maxpool1d(&x, *size)?;
                (out, Cache::Pool(x.shape().to_vec(), argmax))
            }
            Layer::Lstm {
                params,
                return_sequences,
            } => {
                let (out, cache) = lstm_forward_cached(&x, params, Direction::Forward)?;
                let y = if *return_sequences {
                    out.hidden
                } else {
                    Tensor::vector(out.h_final)
                };
                (y, Cache::Lstm(x, cache))
            }
            Layer::BiLstm {
                forward,
                backward,
                return_sequences,
            } => {
                let (y, cache) = bilstm_forward_cached(&x, forward, backward, *return_sequences)?;
                (y, Cache::BiLstm(x, cache))
            }
            Layer::Dense(p) => (dense_forward(&x, p)?, Cache::Dense(x)),
        };
        caches.push(cache);
        x = out;
    }
    if x.len() != 1 {
        return Err(Error::shape("model output", &[1], x.shape()));
    }
    Ok((x.data()[0], caches))
}

/// Accumulates `d(output)/d(theta) * grad_output` into `grads`.
fn backward_sample(
    model: &Model,
    caches: Vec<Cache>,
    grad_output: f64,
    grads: &mut [Tensor],
) -> Result<()> {
    let mut g = Tensor::vector(vec![grad_output]);
    // parameter tensors are laid out layer by layer; walk them from the end
    let mut slot = grads.len();
    for (layer, cache) in model.layers().iter().zip(caches).rev() {
        let n_params = layer.params().len();
        slot -= n_params;
        let out = &mut grads[slot..slot + n_params];
        g = match (layer, cache) {
            (Layer::Conv1d(p), Cache::Conv(x)) => {
                let (gx, gw, gb) = conv1d_backward(&x, p, &g)?;
                out[0].add_assign(&gw);
                out[1].add_assign(&gb);
                gx
            }
            (Layer::Relu, Cache::Relu(x)) => relu_backward(&x, &g),
            (Layer::MaxPool { .. }, Cache::Pool(shape, argmax)) => {
                maxpool1d_backward(&shape, &argmax, &g)
            }
            (
                Layer::Lstm {
                    params,
                    return_sequences,
                },
                Cache::Lstm(x, cache),
            ) => {
                let (gx, lg) = if *return_sequences {
                    lstm_backward(&x, params, &cache, Some(&g), None)?
                } else {
                    lstm_backward(&x, params, &cache, None, Some(g.data()))?
                };
                out[0].add_assign(&lg.w);
                out[1].add_assign(&lg.u);
                out[2].add_assign(&lg.b);
                gx
            }
            (
                Layer::BiLstm {
                    forward,
                    backward,
                    return_sequences,
                },
                Cache::BiLstm(x, cache),
            ) => {
                let (gx, gf, gb) =
                    bilstm_backward(&x, forward, backward, &cache, *return_sequences, &g)?;
                for (dst, src) in out.iter_mut().zip([gf.w, gf.u, gf.b, gb.w, gb.u, gb.b]) {
                    dst.add_assign(&src);
                }
                gx
            }
            (Layer::Dense(p), Cache::Dense(x)) => {
                let (gx, gw, gb) = dense_backward(&x, p, &g)?;
                out[0].add_assign(&gw);
                out[1].add_assign(&gb);
                gx
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "layer/cache mismatch during backward pass".into(),
                ))
            }
        };
    }
    Ok(())
}

/// Zero tensors shaped like every parameter of `model`.
pub fn zero_gradients(model: &Model) -> Vec<Tensor> {
    model
        .parameters()
        .iter()
        .map(|t| Tensor::zeros(t.shape()))
        .collect()
}

/// Batch loss together with one gradient tensor per model parameter.
#[derive(Clone, Debug)]
pub struct BatchGradients {
    pub loss: f64,
    pub predictions: Vec<f64>,
    pub grads: Vec<Tensor>,
}

/// MSE loss over the batch and its gradient with respect to every
/// parameter (the mean of the per-sample gradients).
pub fn backward(model: &Model, inputs: &[Vec<f64>], targets: &[f64]) -> Result<BatchGradients> {
    if inputs.len() != targets.len() {
        return Err(Error::shape("batch", &[targets.len()], &[inputs.len()]));
    }
    if inputs.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = inputs.len() as f64;
    let chunks: Vec<(Vec<f64>, Vec<Tensor>)> = inputs
        .par_chunks(CHUNK)
        .zip(targets.par_chunks(CHUNK))
        .map(|(xs, ts)| {
            let mut grads = zero_gradients(model);
            let mut preds = Vec::with_capacity(xs.len());
            for (x, &t) in xs.iter().zip(ts) {
                let (pred, caches) = forward_cached(model, x)?;
                backward_sample(model, caches, 2.0 * (pred - t) / n, &mut grads)?;
                preds.push(pred);
            }
            Ok((preds, grads))
        })
        .collect::<Result<_>>()?;

    let mut grads = zero_gradients(model);
    let mut predictions = Vec::with_capacity(inputs.len());
    for (preds, chunk_grads) in chunks {
        predictions.extend(preds);
        for (acc, g) in grads.iter_mut().zip(&chunk_grads) {
            acc.add_assign(g);
        }
    }
    let loss = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n;
    Ok(BatchGradients {
        loss,
        predictions,
        grads,
    })
}
