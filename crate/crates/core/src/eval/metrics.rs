use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Normalized,
    Mw,
}

/// Paired actual (`A_t`) and forecast (`F_t`) values on one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSeries {
    actual: Vec<f64>,
    forecast: Vec<f64>,
    scale: Scale,
}

impl EvalSeries {
    pub fn new(actual: Vec<f64>, forecast: Vec<f64>, scale: Scale) -> Result<Self> {
        if actual.len() != forecast.len() {
            return Err(Error::shape("eval series", &[actual.len()], &[forecast.len()]));
        }
        if actual.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(EvalSeries {
            actual,
            forecast,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.actual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actual.is_empty()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn forecast(&self) -> &[f64] {
        &self.forecast
    }

    fn residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.actual.iter().zip(&self.forecast).map(|(a, f)| a - f)
    }
}

/// Mean absolute percentage error, in percent.
pub fn mape(s: &EvalSeries) -> Result<f64> {
    let mut total = 0.0;
    for (i, (a, f)) in s.actual.iter().zip(&s.forecast).enumerate() {
        if *a == 0.0 {
            return Err(Error::ZeroActual { index: i });
        }
        total += ((a - f) / a).abs();
    }
    Ok(total / s.len() as f64 * 100.0)
}

pub fn mae(s: &EvalSeries) -> f64 {
    s.residuals().map(f64::abs).sum::<f64>() / s.len() as f64
}

pub fn mse(s: &EvalSeries) -> f64 {
    s.residuals().map(|r| r * r).sum::<f64>() / s.len() as f64
}

pub fn rmse(s: &EvalSeries) -> f64 {
    mse(s).sqrt()
}

/// MSE, RMSE and MAE on one scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
}

impl ErrorMetrics {
    pub fn of(s: &EvalSeries) -> Self {
        let mse = mse(s);
        ErrorMetrics {
            mse,
            rmse: mse.sqrt(),
            mae: mae(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(a: &[f64], f: &[f64]) -> EvalSeries {
        EvalSeries::new(a.to_vec(), f.to_vec(), Scale::Mw).unwrap()
    }

    #[test]
    fn perfect_forecast() {
        let s = series(&[100.0, 200.0, 300.0], &[100.0, 200.0, 300.0]);
        assert_eq!(mape(&s).unwrap(), 0.0);
        assert_eq!((mae(&s), mse(&s), rmse(&s)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_computed() {
        let s = series(&[100.0, 200.0], &[110.0, 190.0]);
        assert!((mape(&s).unwrap() - 7.5).abs() < 1e-12);
        assert_eq!(mae(&s), 10.0);
        assert_eq!(mse(&s), 100.0);
        assert_eq!(rmse(&s), 10.0);
    }

    #[test]
    fn mape_scale_invariant() {
        let a = [3100.0, 3350.0, 2980.0, 3600.0];
        let f = [3050.0, 3400.0, 3000.0, 3550.0];
        let base = mape(&series(&a, &f)).unwrap();
        for k in [1e-3, 0.5, 7.0, -2.0] {
            let sa: Vec<f64> = a.iter().map(|v| v * k).collect();
            let sf: Vec<f64> = f.iter().map(|v| v * k).collect();
            assert!((mape(&series(&sa, &sf)).unwrap() - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn residual_scaling() {
        let a = [1.0, 2.0, 3.0];
        let f = [1.5, 1.0, 3.25];
        let s = series(&a, &f);
        let k = 3.0;
        let sa: Vec<f64> = a.iter().map(|v| v * k).collect();
        let sf: Vec<f64> = f.iter().map(|v| v * k).collect();
        let t = series(&sa, &sf);
        assert!((mae(&t) - k * mae(&s)).abs() < 1e-12);
        assert!((rmse(&t) - k * rmse(&s)).abs() < 1e-12);
        assert!((mse(&t) - k * k * mse(&s)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let s = series(&[1.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(mape(&s), Err(Error::ZeroActual { index: 1 })));
        assert!(EvalSeries::new(vec![], vec![], Scale::Mw).is_err());
        assert!(EvalSeries::new(vec![1.0], vec![], Scale::Mw).is_err());
    }
}
