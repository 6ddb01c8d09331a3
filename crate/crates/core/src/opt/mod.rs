//! Unconstrained first-order optimizers used by pre-training: L-BFGS with a
//! strong-Wolfe line search, and Adam for stochastic objectives.
//!
//! Objectives report non-finite values to signal an invalid point; line
//! searches back away from those instead of aborting.

mod adam;
mod lbfgs;

pub use adam::{adam, AdamConfig};
pub use lbfgs::{lbfgs, LbfgsConfig, LbfgsOutcome};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
