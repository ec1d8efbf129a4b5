use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Fully connected layer, `weight` is `[out, in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl DenseParams {
    pub fn new(weight: Tensor, bias: Tensor) -> Result<Self> {
        if weight.rank() != 2 {
            return Err(Error::InvalidParameter(format!(
                "dense weight must be [out, in], got {:?}",
                weight.shape()
            )));
        }
        bias.expect_shape("dense bias", &[weight.shape()[0]])?;
        Ok(DenseParams { weight, bias })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        DenseParams {
            weight: Tensor::zeros(&[outputs, inputs]),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }
}

/// `y = W x + b`, no activation.
pub fn dense_forward(x: &Tensor, params: &DenseParams) -> Result<Tensor> {
    x.expect_shape("dense input", &[params.inputs()])?;
    let out = (0..params.outputs())
        .map(|o| {
            params.bias.data()[o]
                + params
                    .weight
                    .row(o)
                    .iter()
                    .zip(x.data())
                    .map(|(w, v)| w * v)
                    .sum::<f64>()
        })
        .collect();
    Ok(Tensor::vector(out))
}

/// Returns `(grad_input, grad_weight, grad_bias)`.
pub fn dense_backward(
    x: &Tensor,
    params: &DenseParams,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    grad_out.expect_shape("dense grad", &[params.outputs()])?;
    let n_in = params.inputs();
    let mut gx = vec![0.0; n_in];
    let mut gw = vec![0.0; params.outputs() * n_in];
    for (o, &g) in grad_out.data().iter().enumerate() {
        let w = params.weight.row(o);
        for k in 0..n_in {
            gx[k] += g * w[k];
            gw[o * n_in + k] = g * x.data()[k];
        }
    }
    Ok((
        Tensor::vector(gx),
        Tensor::new(params.weight.shape().to_vec(), gw)?,
        grad_out.clone(),
    ))
}
