use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Non-overlapping max pooling over the time axis of `[steps, channels]`.
///
/// Stride equals `size`; a trailing remainder shorter than `size` is
/// dropped. Returns the pooled tensor and, for every output cell, the input
/// row that held the maximum (first one on ties).
pub fn maxpool1d(input: &Tensor, size: usize) -> Result<(Tensor, Vec<usize>)> {
    if size == 0 {
        return Err(Error::InvalidParameter("pool size must be >= 1".into()));
    }
    if input.rank() != 2 {
        return Err(Error::shape("maxpool input rank", &[2], &[input.rank()]));
    }
    let (steps, channels) = (input.rows(), input.cols());
    if steps < size {
        return Err(Error::SeriesTooShort {
            len: steps,
            required: size,
        });
    }
    let out_len = steps / size;
    let x = input.data();
    let mut out = Vec::with_capacity(out_len * channels);
    let mut argmax = Vec::with_capacity(out_len * channels);
    for o in 0..out_len {
        for c in 0..channels {
            let mut best = o * size;
            for k in o * size + 1..(o + 1) * size {
                if x[k * channels + c] > x[best * channels + c] {
                    best = k;
                }
            }
            out.push(x[best * channels + c]);
            argmax.push(best);
        }
    }
    Ok((Tensor::matrix(out_len, channels, out)?, argmax))
}

/// Routes each pooled gradient back to the input row recorded in `argmax`.
pub fn maxpool1d_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Tensor {
    let channels = input_shape[1];
    let mut gx = Tensor::zeros(input_shape);
    let g = grad_out.data();
    let gxd = gx.data_mut();
    for (cell, &row) in argmax.iter().enumerate() {
        let c = cell % channels;
        gxd[row * channels + c] += g[cell];
    }
    gx
}
