//! Nadam: Adam with Nesterov momentum in the first-moment estimate.

use crate::error::{Error, Result};
use crate::model::ParameterStore;
use crate::tensor::Real;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub struct NadamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl NadamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        NadamConfig {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl Default for NadamConfig {
    fn default() -> Self {
        Self::with_learning_rate(0.001)
    }
}

/// First/second moment accumulators per parameter, plus the step counter.
#[derive(Debug, Clone, Default)]
pub struct OptimizerState<F> {
    pub step: u64,
    moments: BTreeMap<String, (Vec<F>, Vec<F>)>,
}

impl<F: Real> OptimizerState<F> {
    pub fn new() -> Self {
        OptimizerState {
            step: 0,
            moments: BTreeMap::new(),
        }
    }
}

/// One Nadam update over every trainable parameter.
///
/// With step t (1-based), moments m, v and gradient g:
///   m ← β₁·m + (1−β₁)·g,  v ← β₂·v + (1−β₂)·g²
///   update = lr · (β₁·m/(1−β₁^{t+1}) + (1−β₁)·g/(1−β₁^t)) / (√(v/(1−β₂^t)) + ε)
pub fn nadam_step<F: Real>(
    params: &mut ParameterStore<F>,
    grads: &BTreeMap<String, Vec<F>>,
    state: &mut OptimizerState<F>,
    config: &NadamConfig,
) -> Result<()> {
    state.step += 1;
    let t = state.step as i32;
    let b1 = config.beta1;
    let b2 = config.beta2;
    let m_correction = 1.0 - b1.powi(t + 1);
    let g_correction = 1.0 - b1.powi(t);
    let v_correction = 1.0 - b2.powi(t);

    for (name, grad) in grads {
        let param = params
            .get_mut(name)
            .ok_or_else(|| Error::Internal(format!("gradient for unknown parameter {name:?}")))?;
        if grad.len() != param.values.len() {
            return Err(Error::Internal(format!(
                "gradient length {} does not match parameter {name:?} of {} values",
                grad.len(),
                param.values.len()
            )));
        }
        let (m, v) = state
            .moments
            .entry(name.clone())
            .or_insert_with(|| (vec![F::zero(); grad.len()], vec![F::zero(); grad.len()]));
        for i in 0..grad.len() {
            let g = grad[i].to_f64();
            let mi = b1 * m[i].to_f64() + (1.0 - b1) * g;
            let vi = b2 * v[i].to_f64() + (1.0 - b2) * g * g;
            m[i] = F::from_f64(mi);
            v[i] = F::from_f64(vi);
            let m_hat = mi / m_correction;
            let v_hat = vi / v_correction;
            let nesterov = b1 * m_hat + (1.0 - b1) * g / g_correction;
            let update = config.learning_rate * nesterov / (v_hat.sqrt() + config.epsilon);
            param.values[i] = F::from_f64(param.values[i].to_f64() - update);
        }
    }
    Ok(())
}
