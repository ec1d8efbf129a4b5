use crate::error::{Error, Result};

/// Mean squared error and its gradient with respect to the predictions.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::shape("mse_loss", &[target.len()], &[pred.len()]));
    }
    if pred.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = pred.len() as f64;
    let residuals: Vec<f64> = pred.iter().zip(target).map(|(p, t)| p - t).collect();
    let loss = residuals.iter().map(|r| r * r).sum::<f64>() / n;
    let grad = residuals.iter().map(|r| 2.0 * r / n).collect();
    Ok((loss, grad))
}
