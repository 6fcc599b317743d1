use super::{Model, ModelConfig, NetError, Params, Result, Trainable};

pub const ADAM_BETA1: f32 = 0.9;
pub const ADAM_BETA2: f32 = 0.999;
pub const ADAM_EPS: f32 = 1e-8;

/// Adam moment estimates and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Params,
    pub v: Params,
    pub step: u64,
}

impl AdamState {
    pub fn new(config: &ModelConfig) -> Self {
        AdamState { m: Params::zeros(config), v: Params::zeros(config), step: 0 }
    }

    /// One bias-corrected Adam update without weight decay. Tensors outside
    /// `trainable` keep both their values and their moments.
    pub fn step(&mut self, model: &mut Model, grads: &Params, lr: f32, trainable: Trainable) -> Result<()> {
        if self.m.len() != model.params.len() || grads.len() != model.params.len() {
            return Err(NetError::InvalidConfig("optimizer state does not match the model".into()));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - (ADAM_BETA1 as f64).powi(t);
        let bc2 = 1.0 - (ADAM_BETA2 as f64).powi(t);
        let step_size = (lr as f64 / bc1) as f32;
        let bc2_sqrt = bc2.sqrt() as f32;

        let ps = model.params.tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        let gs = grads.tensors();
        for (i, (((p, m), v), g)) in ps.into_iter().zip(ms).zip(vs).zip(gs).enumerate() {
            if !trainable.includes(i) {
                continue;
            }
            for k in 0..p.len() {
                let gk = g[k];
                m[k] = ADAM_BETA1 * m[k] + (1.0 - ADAM_BETA1) * gk;
                v[k] = ADAM_BETA2 * v[k] + (1.0 - ADAM_BETA2) * gk * gk;
                let denom = v[k].sqrt() / bc2_sqrt + ADAM_EPS;
                p[k] -= step_size * m[k] / denom;
            }
        }
        Ok(())
    }
}
