use crate::error::{Error, Result};
use crate::model::Model;
use crate::tensor::Tensor;
use crate::train::TrainConfig;

/// First and second moment estimates, one tensor per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &[&Tensor]) -> Self {
        let zeros: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn for_model(model: &Model) -> Self {
        AdamState::new(&model.parameters())
    }
}

/// One bias-corrected Adam update.
///
/// Gradients are checked for non-finite entries before anything is
/// modified; the error names the parameter (by `names[k]`, or its index
/// when no names are given) and the step that would have been taken.
pub fn adam_step(
    params: &mut [&mut Tensor],
    grads: &[Tensor],
    state: &mut AdamState,
    config: &TrainConfig,
    names: Option<&[String]>,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::shape(
            "adam parameter count",
            &[params.len()],
            &[grads.len(), state.m.len()],
        ));
    }
    let step = state.t + 1;
    for (k, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() {
            return Err(Error::shape("adam gradient", p.shape(), g.shape()));
        }
        if !g.is_finite() {
            let param = names
                .and_then(|n| n.get(k).cloned())
                .unwrap_or_else(|| format!("#{k}"));
            return Err(Error::NonFiniteGradient { param, step });
        }
    }

    state.t = step;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powi(step as i32);
    let c2 = 1.0 - b2.powi(step as i32);
    for (k, p) in params.iter_mut().enumerate() {
        let m = state.m[k].data_mut();
        let v = state.v[k].data_mut();
        for (i, (theta, &g)) in p.data_mut().iter_mut().zip(grads[k].data()).enumerate() {
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            *theta -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
    Ok(())
}

/// [`adam_step`] over every parameter of a model.
pub fn adam_step_model(
    model: &mut Model,
    grads: &[Tensor],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    let names = model.parameter_names();
    let mut params = model.parameters_mut();
    adam_step(&mut params, grads, state, config, Some(&names))
}
