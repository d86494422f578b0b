//! Optimizers: Adam with bias correction, and plain mini-batch SGD.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::grad::GradientSet;
use super::TrainError;

/// Adam moment hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates for the three parameter blocks.
#[derive(Debug, Clone)]
pub struct AdamState {
    params: AdamParams,
    m_hidden: Array2<f64>,
    v_hidden: Array2<f64>,
    m_out: Array1<f64>,
    v_out: Array1<f64>,
    m_bias: f64,
    v_bias: f64,
    step: u64,
}

impl AdamState {
    pub fn new(neurons: usize, dim: usize, params: AdamParams) -> Self {
        Self {
            params,
            m_hidden: Array2::zeros((neurons, dim)),
            v_hidden: Array2::zeros((neurons, dim)),
            m_out: Array1::zeros(neurons),
            v_out: Array1::zeros(neurons),
            m_bias: 0.0,
            v_bias: 0.0,
            step: 0,
        }
    }

    /// One Adam update of `(hidden, out, bias)` along `−lr·m̂/(√v̂+ε)`.
    pub fn step(
        &mut self,
        hidden: &mut Array2<f64>,
        out: &mut Array1<f64>,
        bias: &mut f64,
        grads: &GradientSet,
        lr: f64,
    ) -> Result<(), TrainError> {
        if grads.d_hidden.dim() != hidden.dim() || grads.d_out.len() != out.len() {
            return Err(TrainError::ShapeMismatch(format!(
                "gradient shape {:?}/{} does not match parameters {:?}/{}",
                grads.d_hidden.dim(),
                grads.d_out.len(),
                hidden.dim(),
                out.len()
            )));
        }
        self.step += 1;
        let AdamParams { beta1, beta2, eps } = self.params;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);

        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };

        for ((p, m), (v, &g)) in hidden
            .iter_mut()
            .zip(self.m_hidden.iter_mut())
            .zip(self.v_hidden.iter_mut().zip(grads.d_hidden.iter()))
        {
            update(p, m, v, g);
        }
        for ((p, m), (v, &g)) in out
            .iter_mut()
            .zip(self.m_out.iter_mut())
            .zip(self.v_out.iter_mut().zip(grads.d_out.iter()))
        {
            update(p, m, v, g);
        }
        let (mut mb, mut vb) = (self.m_bias, self.v_bias);
        update(bias, &mut mb, &mut vb, grads.d_bias);
        self.m_bias = mb;
        self.v_bias = vb;
        Ok(())
    }
}

/// One plain gradient-descent update `θ ← θ − lr·∇H`.
pub fn sgd_step(
    hidden: &mut Array2<f64>,
    out: &mut Array1<f64>,
    bias: &mut f64,
    grads: &GradientSet,
    lr: f64,
) -> Result<(), TrainError> {
    if grads.d_hidden.dim() != hidden.dim() || grads.d_out.len() != out.len() {
        return Err(TrainError::ShapeMismatch(format!(
            "gradient shape {:?}/{} does not match parameters {:?}/{}",
            grads.d_hidden.dim(),
            grads.d_out.len(),
            hidden.dim(),
            out.len()
        )));
    }
    hidden.zip_mut_with(&grads.d_hidden, |p, &g| *p -= lr * g);
    out.zip_mut_with(&grads.d_out, |p, &g| *p -= lr * g);
    *bias -= lr * grads.d_bias;
    Ok(())
}
