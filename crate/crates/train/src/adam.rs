use indexmap::IndexMap;
use u2s_nn::Tensor;

use crate::{Result, TrainError};

/// Bias-corrected Adam with per-parameter moment tensors.
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    first: IndexMap<String, Tensor>,
    second: IndexMap<String, Tensor>,
}

impl AdamState {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: IndexMap::new(),
            second: IndexMap::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update over all parameters. Validates every gradient before
    /// touching any parameter, so a NaN gradient aborts the whole step.
    pub fn step(
        &mut self,
        params: &mut IndexMap<String, Tensor>,
        grads: &IndexMap<String, Tensor>,
    ) -> Result<()> {
        for (name, p) in params.iter() {
            let g = grads
                .get(name)
                .ok_or_else(|| TrainError::InvalidArgument(format!("missing gradient for {name}")))?;
            if g.shape() != p.shape() {
                return Err(TrainError::InvalidArgument(format!(
                    "gradient for {name} shaped {:?}, parameter {:?}",
                    g.shape(),
                    p.shape()
                )));
            }
            if !g.is_finite() {
                return Err(TrainError::NonFinite(format!("gradient for {name}")));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (name, p) in params.iter_mut() {
            let g = &grads[name];
            let m = self
                .first
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.shape()));
            let v = self
                .second
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.shape()));
            for ((pv, gv), (mv, vv)) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut().iter_mut().zip(v.data_mut()))
            {
                *mv = self.beta1 * *mv + (1.0 - self.beta1) * gv;
                *vv = self.beta2 * *vv + (1.0 - self.beta2) * gv * gv;
                let m_hat = *mv / c1;
                let v_hat = *vv / c2;
                *pv -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
