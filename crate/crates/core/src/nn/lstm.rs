//! LSTM cells, unidirectional sequence runs with BPTT, and the
//! bidirectional wrapper.
//!
//! Gates are packed in the fixed order forget, input, output, candidate.
//! The three gates use the logistic sigmoid; the candidate uses tanh.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::activation::sigmoid_scalar;
use crate::tensor::Tensor;

pub const GATES: usize = 4;
pub const FORGET: usize = 0;
pub const INPUT: usize = 1;
pub const OUTPUT: usize = 2;
pub const CANDIDATE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// `w`: `[4, units, input]`, `u`: `[4, units, units]`, `b`: `[4, units]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

impl LstmParams {
    pub fn new(w: Tensor, u: Tensor, b: Tensor) -> Result<Self> {
        if w.rank() != 3 || w.shape()[0] != GATES {
            return Err(Error::InvalidParameter(format!(
                "lstm input weights must be [4, units, input], got {:?}",
                w.shape()
            )));
        }
        let units = w.shape()[1];
        u.expect_shape("lstm recurrent weights", &[GATES, units, units])?;
        b.expect_shape("lstm bias", &[GATES, units])?;
        Ok(LstmParams { w, u, b })
    }

    pub fn zeros(input: usize, units: usize) -> Self {
        LstmParams {
            w: Tensor::zeros(&[GATES, units, input]),
            u: Tensor::zeros(&[GATES, units, units]),
            b: Tensor::zeros(&[GATES, units]),
        }
    }

    pub fn units(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn input_dim(&self) -> usize {
        self.w.shape()[2]
    }
}

/// Post-activation gate values and resulting state for one step.
#[derive(Clone, Debug)]
struct Step {
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    h: Vec<f64>,
}

fn cell_step(x: &[f64], h_prev: &[f64], c_prev: &[f64], p: &LstmParams) -> Step {
    let units = p.units();
    let input = p.input_dim();
    let (w, u, b) = (p.w.data(), p.u.data(), p.b.data());
    let mut gates = vec![0.0; GATES * units];
    for g in 0..GATES {
        for k in 0..units {
            let row = g * units + k;
            let wx: f64 = w[row * input..(row + 1) * input]
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum();
            let uh: f64 = u[row * units..(row + 1) * units]
                .iter()
                .zip(h_prev)
                .map(|(a, b)| a * b)
                .sum();
            let z = wx + uh + b[row];
            gates[row] = if g == CANDIDATE {
                z.tanh()
            } else {
                sigmoid_scalar(z)
            };
        }
    }
    let mut c = vec![0.0; units];
    let mut tanh_c = vec![0.0; units];
    let mut h = vec![0.0; units];
    for k in 0..units {
        c[k] = gates[FORGET * units + k] * c_prev[k]
            + gates[INPUT * units + k] * gates[CANDIDATE * units + k];
        tanh_c[k] = c[k].tanh();
        h[k] = gates[OUTPUT * units + k] * tanh_c[k];
    }
    Step {
        gates,
        c,
        tanh_c,
        h,
    }
}

/// One LSTM step. Returns `(h_t, c_t)`.
pub fn lstm_cell_forward(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    params: &LstmParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let units = params.units();
    if x.len() != params.input_dim() {
        return Err(Error::shape("lstm cell input", &[params.input_dim()], &[x.len()]));
    }
    if h_prev.len() != units || c_prev.len() != units {
        return Err(Error::shape(
            "lstm cell state",
            &[units, units],
            &[h_prev.len(), c_prev.len()],
        ));
    }
    let step = cell_step(x, h_prev, c_prev, params);
    Ok((step.h, step.c))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmOutput {
    /// `[steps, units]`, row `t` is the hidden state at input time `t`
    /// regardless of direction.
    pub hidden: Tensor,
    /// State after the last processed step (time `T-1` going forward,
    /// time `0` going backward).
    pub h_final: Vec<f64>,
    pub c_final: Vec<f64>,
}

/// Activations retained from a sequence run for backpropagation.
#[derive(Clone, Debug)]
pub struct LstmCache {
    direction: Direction,
    /// In processing order.
    order: Vec<usize>,
    steps: Vec<Step>,
}

fn time_order(steps: usize, direction: Direction) -> Vec<usize> {
    match direction {
        Direction::Forward => (0..steps).collect(),
        Direction::Backward => (0..steps).rev().collect(),
    }
}

/// Runs a zero-initialised LSTM over `seq` (`[steps, input]`).
pub fn lstm_forward(seq: &Tensor, params: &LstmParams, direction: Direction) -> Result<LstmOutput> {
    lstm_forward_cached(seq, params, direction).map(|(out, _)| out)
}

pub fn lstm_forward_cached(
    seq: &Tensor,
    params: &LstmParams,
    direction: Direction,
) -> Result<(LstmOutput, LstmCache)> {
    if seq.rank() != 2 || seq.rows() == 0 {
        return Err(Error::EmptySequence);
    }
    if seq.cols() != params.input_dim() {
        return Err(Error::shape(
            "lstm sequence [steps, input]",
            &[seq.rows(), params.input_dim()],
            seq.shape(),
        ));
    }
    let units = params.units();
    let order = time_order(seq.rows(), direction);
    let mut hidden = Tensor::zeros(&[seq.rows(), units]);
    let mut steps: Vec<Step> = Vec::with_capacity(order.len());
    let zeros = vec![0.0; units];
    for &t in &order {
        let (h_prev, c_prev) = match steps.last() {
            Some(s) => (&s.h[..], &s.c[..]),
            None => (&zeros[..], &zeros[..]),
        };
        let step = cell_step(seq.row(t), h_prev, c_prev, params);
        hidden.row_mut(t).copy_from_slice(&step.h);
        steps.push(step);
    }
    let last = steps.last().expect("non-empty sequence");
    let out = LstmOutput {
        hidden,
        h_final: last.h.clone(),
        c_final: last.c.clone(),
    };
    Ok((
        out,
        LstmCache {
            direction,
            order,
            steps,
        },
    ))
}

/// Gradients for one set of [`LstmParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct LstmGrads {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

/// Backpropagation through time.
///
/// `grad_hidden` (`[steps, units]`, aligned to input time) is the loss
/// gradient flowing into every per-step output; `grad_h_final` flows into
/// the final hidden state. Either may be absent. Returns the gradient with
/// respect to `seq` plus the parameter gradients.
pub fn lstm_backward(
    seq: &Tensor,
    params: &LstmParams,
    cache: &LstmCache,
    grad_hidden: Option<&Tensor>,
    grad_h_final: Option<&[f64]>,
) -> Result<(Tensor, LstmGrads)> {
    let units = params.units();
    let input = params.input_dim();
    let steps = seq.rows();
    if cache.steps.len() != steps {
        return Err(Error::shape("lstm cache length", &[steps], &[cache.steps.len()]));
    }
    if let Some(g) = grad_hidden {
        g.expect_shape("lstm hidden grad", &[steps, units])?;
    }
    if let Some(g) = grad_h_final {
        if g.len() != units {
            return Err(Error::shape("lstm final-state grad", &[units], &[g.len()]));
        }
    }

    let (w, u) = (params.w.data(), params.u.data());
    let mut gw = vec![0.0; w.len()];
    let mut gu = vec![0.0; u.len()];
    let mut gb = vec![0.0; GATES * units];
    let mut gseq = Tensor::zeros(seq.shape());
    let mut dh_next = vec![0.0; units];
    let mut dc_next = vec![0.0; units];
    let mut dz = vec![0.0; GATES * units];
    let zeros = vec![0.0; units];

    for s in (0..steps).rev() {
        let t = cache.order[s];
        let step = &cache.steps[s];
        let (h_prev, c_prev) = if s == 0 {
            (&zeros[..], &zeros[..])
        } else {
            (&cache.steps[s - 1].h[..], &cache.steps[s - 1].c[..])
        };
        let x = seq.row(t);
        let gates = &step.gates;

        for k in 0..units {
            let mut dh = dh_next[k];
            if let Some(g) = grad_hidden {
                dh += g.row(t)[k];
            }
            if s == steps - 1 {
                if let Some(g) = grad_h_final {
                    dh += g[k];
                }
            }
            let f = gates[FORGET * units + k];
            let i = gates[INPUT * units + k];
            let o = gates[OUTPUT * units + k];
            let cand = gates[CANDIDATE * units + k];
            let tc = step.tanh_c[k];

            let d_o = dh * tc;
            let dc = dh * o * (1.0 - tc * tc) + dc_next[k];
            let d_f = dc * c_prev[k];
            let d_i = dc * cand;
            let d_cand = dc * i;
            dc_next[k] = dc * f;

            dz[FORGET * units + k] = d_f * f * (1.0 - f);
            dz[INPUT * units + k] = d_i * i * (1.0 - i);
            dz[OUTPUT * units + k] = d_o * o * (1.0 - o);
            dz[CANDIDATE * units + k] = d_cand * (1.0 - cand * cand);
        }

        dh_next.fill(0.0);
        let gx = gseq.row_mut(t);
        for row in 0..GATES * units {
            let d = dz[row];
            if d == 0.0 {
                continue;
            }
            gb[row] += d;
            let wrow = &w[row * input..(row + 1) * input];
            let gwrow = &mut gw[row * input..(row + 1) * input];
            for m in 0..input {
                gwrow[m] += d * x[m];
                gx[m] += d * wrow[m];
            }
            let urow = &u[row * units..(row + 1) * units];
            let gurow = &mut gu[row * units..(row + 1) * units];
            for m in 0..units {
                gurow[m] += d * h_prev[m];
                dh_next[m] += d * urow[m];
            }
        }
    }

    Ok((
        gseq,
        LstmGrads {
            w: Tensor::new(params.w.shape().to_vec(), gw)?,
            u: Tensor::new(params.u.shape().to_vec(), gu)?,
            b: Tensor::new(params.b.shape().to_vec(), gb)?,
        },
    ))
}

impl LstmCache {
    pub fn direction(&self) -> Direction {
        self.direction
    }
}

#[derive(Clone, Debug)]
pub struct BiLstmCache {
    forward: LstmCache,
    backward: LstmCache,
}

fn check_pair(fw: &LstmParams, bw: &LstmParams) -> Result<()> {
    if fw.units() != bw.units() || fw.input_dim() != bw.input_dim() {
        return Err(Error::shape(
            "bilstm directions [units, input]",
            &[fw.units(), fw.input_dim()],
            &[bw.units(), bw.input_dim()],
        ));
    }
    Ok(())
}

/// Bidirectional LSTM.
///
/// With `return_sequences`, row `t` of the `[steps, 2 * units]` output is
/// the forward state at `t` followed by the backward state at `t`.
/// Otherwise the output is the `2 * units` vector of the forward state
/// after the last step and the backward state after the first.
pub fn bilstm_forward(
    seq: &Tensor,
    fw: &LstmParams,
    bw: &LstmParams,
    return_sequences: bool,
) -> Result<Tensor> {
    bilstm_forward_cached(seq, fw, bw, return_sequences).map(|(out, _)| out)
}

pub fn bilstm_forward_cached(
    seq: &Tensor,
    fw: &LstmParams,
    bw: &LstmParams,
    return_sequences: bool,
) -> Result<(Tensor, BiLstmCache)> {
    check_pair(fw, bw)?;
    let (f_out, f_cache) = lstm_forward_cached(seq, fw, Direction::Forward)?;
    let (b_out, b_cache) = lstm_forward_cached(seq, bw, Direction::Backward)?;
    let units = fw.units();
    let out = if return_sequences {
        let steps = seq.rows();
        let mut data = Vec::with_capacity(steps * 2 * units);
        for t in 0..steps {
            data.extend_from_slice(f_out.hidden.row(t));
            data.extend_from_slice(b_out.hidden.row(t));
        }
        Tensor::matrix(steps, 2 * units, data)?
    } else {
        let mut data = f_out.h_final;
        data.extend_from_slice(&b_out.h_final);
        Tensor::vector(data)
    };
    Ok((
        out,
        BiLstmCache {
            forward: f_cache,
            backward: b_cache,
        },
    ))
}

/// Returns `(grad_seq, forward grads, backward grads)`.
pub fn bilstm_backward(
    seq: &Tensor,
    fw: &LstmParams,
    bw: &LstmParams,
    cache: &BiLstmCache,
    return_sequences: bool,
    grad_out: &Tensor,
) -> Result<(Tensor, LstmGrads, LstmGrads)> {
    let units = fw.units();
    let (gseq_f, grads_f, gseq_b, grads_b);
    if return_sequences {
        let steps = seq.rows();
        grad_out.expect_shape("bilstm grad", &[steps, 2 * units])?;
        let mut gf = Tensor::zeros(&[steps, units]);
        let mut gb = Tensor::zeros(&[steps, units]);
        for t in 0..steps {
            let row = grad_out.row(t);
            gf.row_mut(t).copy_from_slice(&row[..units]);
            gb.row_mut(t).copy_from_slice(&row[units..]);
        }
        (gseq_f, grads_f) = lstm_backward(seq, fw, &cache.forward, Some(&gf), None)?;
        (gseq_b, grads_b) = lstm_backward(seq, bw, &cache.backward, Some(&gb), None)?;
    } else {
        grad_out.expect_shape("bilstm grad", &[2 * units])?;
        let g = grad_out.data();
        (gseq_f, grads_f) = lstm_backward(seq, fw, &cache.forward, None, Some(&g[..units]))?;
        (gseq_b, grads_b) = lstm_backward(seq, bw, &cache.backward, None, Some(&g[units..]))?;
    }
    let mut gseq = gseq_f;
    gseq.add_assign(&gseq_b);
    Ok((gseq, grads_f, grads_b))
}
