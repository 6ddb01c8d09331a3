//! Hierarchical Gaussian-process pre-training and transfer Bayesian
//! optimization.
//!
//! The crate learns a universal prior over GP parameters from observations
//! partitioned across multiple search spaces (two-step pre-training:
//! per-space marginal-likelihood MLE, then an MLE over the fitted parameter
//! sets), and runs prior-conditioned Bayesian optimization over finite
//! candidate pools with likelihood-reweighted acquisition functions.

// `!(x < y)` comparisons are deliberate: they reject NaN alongside the
// out-of-range case.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bo;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gp;
pub mod math;
pub mod opt;
pub mod pretrain;
pub mod prior;
pub mod rng;

#[cfg(test)]
pub(crate) mod testing;

pub use error::{Error, Result};
pub use gp::{GpParams, GpPosterior, KernelSpec, Matern, SubDataset};

