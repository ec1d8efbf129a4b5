use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    bilstm_forward, conv1d_forward, dense_forward, lstm_forward, maxpool1d, relu, ConvParams,
    DenseParams, Direction, LstmParams, Padding,
};
use crate::tensor::Tensor;

/// One stage of a model with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv1d(ConvParams),
    Relu,
    MaxPool {
        size: usize,
    },
    Lstm {
        params: LstmParams,
        return_sequences: bool,
    },
    BiLstm {
        forward: LstmParams,
        backward: LstmParams,
        return_sequences: bool,
    },
    Dense(DenseParams),
}

/// Parameter-free description of a layer, as recorded in checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d {
        in_channels: usize,
        filters: usize,
        kernel: usize,
        padding: Padding,
    },
    Relu,
    MaxPool {
        size: usize,
    },
    Lstm {
        input: usize,
        units: usize,
        return_sequences: bool,
    },
    BiLstm {
        input: usize,
        units: usize,
        return_sequences: bool,
    },
    Dense {
        inputs: usize,
        outputs: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamManifest {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerManifest {
    pub layer: LayerSpec,
    pub output_shape: Vec<usize>,
    pub params: Vec<ParamManifest>,
}

impl Layer {
    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Conv1d(p) => LayerSpec::Conv1d {
                in_channels: p.in_channels(),
                filters: p.filters(),
                kernel: p.kernel(),
                padding: p.padding,
            },
            Layer::Relu => LayerSpec::Relu,
            Layer::MaxPool { size } => LayerSpec::MaxPool { size: *size },
            Layer::Lstm {
                params,
                return_sequences,
            } => LayerSpec::Lstm {
                input: params.input_dim(),
                units: params.units(),
                return_sequences: *return_sequences,
            },
            Layer::BiLstm {
                forward,
                return_sequences,
                ..
            } => LayerSpec::BiLstm {
                input: forward.input_dim(),
                units: forward.units(),
                return_sequences: *return_sequences,
            },
            Layer::Dense(p) => LayerSpec::Dense {
                inputs: p.inputs(),
                outputs: p.outputs(),
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::Relu => "relu",
            Layer::MaxPool { .. } => "max_pool",
            Layer::Lstm { .. } => "lstm",
            Layer::BiLstm { .. } => "bi_lstm",
            Layer::Dense(_) => "dense",
        }
    }

    /// Parameter tensors with their short names, in checkpoint order.
    pub fn params(&self) -> Vec<(&'static str, &Tensor)> {
        match self {
            Layer::Conv1d(p) => vec![("weight", &p.weight), ("bias", &p.bias)],
            Layer::Relu | Layer::MaxPool { .. } => Vec::new(),
            Layer::Lstm { params, .. } => vec![("w", &params.w), ("u", &params.u), ("b", &params.b)],
            Layer::BiLstm {
                forward, backward, ..
            } => vec![
                ("forward.w", &forward.w),
                ("forward.u", &forward.u),
                ("forward.b", &forward.b),
                ("backward.w", &backward.w),
                ("backward.u", &backward.u),
                ("backward.b", &backward.b),
            ],
            Layer::Dense(p) => vec![("weight", &p.weight), ("bias", &p.bias)],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Conv1d(p) => vec![&mut p.weight, &mut p.bias],
            Layer::Relu | Layer::MaxPool { .. } => Vec::new(),
            Layer::Lstm { params, .. } => vec![&mut params.w, &mut params.u, &mut params.b],
            Layer::BiLstm {
                forward, backward, ..
            } => vec![
                &mut forward.w,
                &mut forward.u,
                &mut forward.b,
                &mut backward.w,
                &mut backward.u,
                &mut backward.b,
            ],
            Layer::Dense(p) => vec![&mut p.weight, &mut p.bias],
        }
    }

    /// Output shape for a given input shape, or the mismatch that makes
    /// the layer inapplicable.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let seq = |channels: usize| -> Result<usize> {
            match input {
                [steps, c] if *c == channels => Ok(*steps),
                _ => Err(Error::shape(
                    format!("{} input", self.kind()),
                    &[input.first().copied().unwrap_or(0), channels],
                    input,
                )),
            }
        };
        match self {
            Layer::Conv1d(p) => {
                let steps = seq(p.in_channels())?;
                let out = p.output_len(steps).ok_or_else(|| {
                    Error::shape("conv1d length", &[p.kernel()], &[steps])
                })?;
                Ok(vec![out, p.filters()])
            }
            Layer::Relu => Ok(input.to_vec()),
            Layer::MaxPool { size } => match input {
                [steps, c] if *steps >= *size && *size > 0 => Ok(vec![steps / size, *c]),
                _ => Err(Error::shape("max_pool input", &[*size, 1], input)),
            },
            Layer::Lstm {
                params,
                return_sequences,
            } => {
                let steps = seq(params.input_dim())?;
                Ok(if *return_sequences {
                    vec![steps, params.units()]
                } else {
                    vec![params.units()]
                })
            }
            Layer::BiLstm {
                forward,
                backward,
                return_sequences,
            } => {
                if forward.units() != backward.units() || forward.input_dim() != backward.input_dim() {
                    return Err(Error::shape(
                        "bi_lstm directions",
                        &[forward.units(), forward.input_dim()],
                        &[backward.units(), backward.input_dim()],
                    ));
                }
                let steps = seq(forward.input_dim())?;
                Ok(if *return_sequences {
                    vec![steps, 2 * forward.units()]
                } else {
                    vec![2 * forward.units()]
                })
            }
            Layer::Dense(p) => {
                if input != [p.inputs()] {
                    return Err(Error::shape("dense input", &[p.inputs()], input));
                }
                Ok(vec![p.outputs()])
            }
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Conv1d(p) => conv1d_forward(x, p),
            Layer::Relu => Ok(relu(x)),
            Layer::MaxPool { size } => maxpool1d(x, *size).map(|(out, _)| out),
            Layer::Lstm {
                params,
                return_sequences,
            } => {
                let out = lstm_forward(x, params, Direction::Forward)?;
                Ok(if *return_sequences {
                    out.hidden
                } else {
                    Tensor::vector(out.h_final)
                })
            }
            Layer::BiLstm {
                forward,
                backward,
                return_sequences,
            } => bilstm_forward(x, forward, backward, *return_sequences),
            Layer::Dense(p) => dense_forward(x, p),
        }
    }
}
