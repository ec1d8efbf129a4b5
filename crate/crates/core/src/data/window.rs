use crate::error::{Error, Result};

/// Supervised samples framed from a scaled series.
///
/// `inputs[i]` is `series[i .. i + window]` and `targets[i]` is
/// `series[i + window + horizon - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub window: usize,
    pub horizon: usize,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Number of samples a series of length `len` yields; `None` when too short.
pub fn window_count(len: usize, window: usize, horizon: usize) -> Option<usize> {
    (len + 1).checked_sub(window + horizon).filter(|&n| n > 0)
}

pub fn make_windows(series: &[f64], window: usize, horizon: usize) -> Result<WindowedDataset> {
    if window == 0 || horizon == 0 {
        return Err(Error::InvalidParameter(format!(
            "window and horizon must be >= 1, got window {window}, horizon {horizon}"
        )));
    }
    let n = window_count(series.len(), window, horizon).ok_or(Error::SeriesTooShort {
            len: series.len(),
            required: window + horizon,
        })?;
    let inputs = (0..n).map(|i| series[i..i + window].to_vec()).collect();
    let targets = (0..n).map(|i| series[i + window + horizon - 1]).collect();
    Ok(WindowedDataset {
        inputs,
        targets,
        window,
        horizon,
    })
}
