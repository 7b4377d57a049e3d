use crate::error::{invalid, Result, TopoError};
use crate::net::Params;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moments plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    m: Params,
    v: Params,
    t: u64,
}

impl AdamState {
    pub fn new(like: &Params) -> Self {
        Self {
            m: like.zeros_like(),
            v: like.zeros_like(),
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update. The gradient is checked for non-finite
/// entries before anything is touched.
pub fn adam_step(params: &mut Params, grad: &Params, state: &mut AdamState, cfg: &AdamConfig) -> Result<()> {
    if grad.len() != params.len() || state.m.len() != params.len() {
        return Err(invalid(format!(
            "gradient has {} entries, parameters {}",
            grad.len(),
            params.len()
        )));
    }
    for (name, block) in grad.blocks() {
        if let Some(i) = block.iter().position(|g| !g.is_finite()) {
            return Err(TopoError::Numeric(format!(
                "non-finite gradient in parameter block {name} at index {i}"
            )));
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    let grads = grad.blocks();
    let ms = state.m.blocks_mut();
    let vs = state.v.blocks_mut();
    for ((((_, w), (_, g)), (_, m)), (_, v)) in params.blocks_mut().into_iter().zip(grads).zip(ms).zip(vs) {
        for (((w, &g), m), v) in w.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}
