use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub iters: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn new(iters: usize, learning_rate: f64) -> Self {
        AdamConfig {
            iters,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Run Adam on a (possibly stochastic) objective. The closure receives the
/// iteration index so it can draw a fresh mini-batch deterministically.
/// Non-finite gradients abort with an error (optimizer divergence).
pub fn adam<F>(x0: &[f64], mut grad_fn: F, cfg: &AdamConfig) -> Result<Vec<f64>>
where
    F: FnMut(usize, &[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    for t in 0..cfg.iters {
        let (value, g) = grad_fn(t, &x);
        if !value.is_finite() || g.iter().any(|gi| !gi.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "Adam diverged at iteration {t} (non-finite objective or gradient)"
            )));
        }
        let b1t = 1.0 - cfg.beta1.powi(t as i32 + 1);
        let b2t = 1.0 - cfg.beta2.powi(t as i32 + 1);
        for i in 0..n {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / b1t;
            let v_hat = v[i] / b2t;
            x[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(x)
}
