use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Padding {
    /// Zero-pad `(k - 1) / 2` on the left and the rest on the right.
    Same,
    Valid,
}

/// 1-D convolution parameters. `weight` is `[filters, in_channels, kernel]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams {
    pub weight: Tensor,
    pub bias: Tensor,
    pub padding: Padding,
}

impl ConvParams {
    pub fn new(weight: Tensor, bias: Tensor, padding: Padding) -> Result<Self> {
        if weight.rank() != 3 {
            return Err(Error::InvalidParameter(format!(
                "conv weight must be [filters, channels, kernel], got {:?}",
                weight.shape()
            )));
        }
        bias.expect_shape("conv bias", &[weight.shape()[0]])?;
        Ok(ConvParams {
            weight,
            bias,
            padding,
        })
    }

    pub fn zeros(filters: usize, in_channels: usize, kernel: usize, padding: Padding) -> Self {
        ConvParams {
            weight: Tensor::zeros(&[filters, in_channels, kernel]),
            bias: Tensor::zeros(&[filters]),
            padding,
        }
    }

    pub fn filters(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    fn left_pad(&self) -> usize {
        match self.padding {
            Padding::Same => (self.kernel() - 1) / 2,
            Padding::Valid => 0,
        }
    }

    /// Output length for an input of `len` steps, `None` if too short.
    pub fn output_len(&self, len: usize) -> Option<usize> {
        match self.padding {
            Padding::Same => Some(len),
            Padding::Valid => (len + 1).checked_sub(self.kernel()).filter(|&n| n > 0),
        }
    }

    fn check_input(&self, input: &Tensor) -> Result<usize> {
        if input.rank() != 2 || input.shape()[1] != self.in_channels() {
            return Err(Error::shape(
                "conv1d input [steps, channels]",
                &[input.shape()[0], self.in_channels()],
                input.shape(),
            ));
        }
        self.output_len(input.rows()).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "valid conv needs at least {} steps, got {}",
                self.kernel(),
                input.rows()
            ))
        })
    }
}

/// `out[i, j] = b[j] + sum_{c, m} w[j, c, m] * x[i + m - pad, c]`, with
/// out-of-range input positions read as zero.
pub fn conv1d_forward(input: &Tensor, params: &ConvParams) -> Result<Tensor> {
    let out_len = params.check_input(input)?;
    let (filters, channels, kernel) = (params.filters(), params.in_channels(), params.kernel());
    let steps = input.rows() as isize;
    let pad = params.left_pad() as isize;
    let w = params.weight.data();
    let x = input.data();
    let mut out = vec![0.0; out_len * filters];
    for i in 0..out_len {
        for j in 0..filters {
            let mut acc = params.bias.data()[j];
            for m in 0..kernel {
                let src = i as isize + m as isize - pad;
                if src < 0 || src >= steps {
                    continue;
                }
                let row = &x[src as usize * channels..(src as usize + 1) * channels];
                for (c, &xv) in row.iter().enumerate() {
                    acc += w[(j * channels + c) * kernel + m] * xv;
                }
            }
            out[i * filters + j] = acc;
        }
    }
    Tensor::matrix(out_len, filters, out)
}

/// Returns `(grad_input, grad_weight, grad_bias)`.
pub fn conv1d_backward(
    input: &Tensor,
    params: &ConvParams,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let out_len = params.check_input(input)?;
    let (filters, channels, kernel) = (params.filters(), params.in_channels(), params.kernel());
    grad_out.expect_shape("conv1d grad", &[out_len, filters])?;
    let steps = input.rows() as isize;
    let pad = params.left_pad() as isize;
    let w = params.weight.data();
    let x = input.data();
    let g = grad_out.data();
    let mut gx = vec![0.0; x.len()];
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; filters];
    for i in 0..out_len {
        for j in 0..filters {
            let go = g[i * filters + j];
            gb[j] += go;
            for m in 0..kernel {
                let src = i as isize + m as isize - pad;
                if src < 0 || src >= steps {
                    continue;
                }
                let base = src as usize * channels;
                for c in 0..channels {
                    let wi = (j * channels + c) * kernel + m;
                    gw[wi] += go * x[base + c];
                    gx[base + c] += go * w[wi];
                }
            }
        }
    }
    Ok((
        Tensor::new(input.shape().to_vec(), gx)?,
        Tensor::new(params.weight.shape().to_vec(), gw)?,
        Tensor::vector(gb),
    ))
}
