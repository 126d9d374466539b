//! Adam parameter updates with bias correction.

use crate::tensor::Tensor;

/// Optimizer hyperparameters. The learning rate is the only value the
/// training setup varies; the moment coefficients keep their usual defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter moment estimates and step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    hyper: AdamHyper,
}

impl AdamState {
    pub fn new(numel: usize, hyper: AdamHyper) -> Self {
        AdamState {
            m: vec![0.0; numel],
            v: vec![0.0; numel],
            t: 0,
            hyper,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update: `param -= lr * m̂ / (sqrt(v̂) + eps)` with bias-corrected
/// moment estimates. Panics if the gradient length differs from the state.
pub fn adam_step(param: &mut Tensor, grad: &[f64], state: &mut AdamState) {
    assert_eq!(param.numel(), grad.len(), "gradient/parameter length mismatch");
    assert_eq!(state.m.len(), grad.len(), "state/parameter length mismatch");
    let h = state.hyper;
    state.t += 1;
    let bc1 = 1.0 - h.beta1.powi(state.t as i32);
    let bc2 = 1.0 - h.beta2.powi(state.t as i32);
    for ((p, &g), (m, v)) in param
        .values_mut()
        .iter_mut()
        .zip(grad)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        *m = h.beta1 * *m + (1.0 - h.beta1) * g;
        *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= h.lr * m_hat / (v_hat.sqrt() + h.epsilon);
    }
}
