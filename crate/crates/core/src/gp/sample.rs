use super::chol::cholesky_with_jitter;
use super::kernel::gram_matrix;
use super::{GpParams, KernelSpec};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Exact draw of GP function values at the given inputs:
/// mean + L z with L the Cholesky factor of the (jittered) noiseless gram,
/// plus i.i.d. observation noise when `with_noise`. Deterministic given the
/// rng state.
pub fn sample_function_values<R: Rng + ?Sized>(
    params: &GpParams,
    xs: &DMatrix<f64>,
    spec: KernelSpec,
    rng: &mut R,
    with_noise: bool,
) -> Result<DVector<f64>> {
    if xs.nrows() == 0 {
        return Err(Error::invalid_argument("no sample locations"));
    }
    let kf = gram_matrix(xs, params, spec, false)?;
    let (chol, _) = cholesky_with_jitter(&kf, params.signal_variance)?;
    let n = xs.nrows();
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut values = chol.l() * z;
    for v in values.iter_mut() {
        *v += params.constant_mean;
    }
    if with_noise {
        let sd = params.noise_variance.sqrt();
        for v in values.iter_mut() {
            *v += sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Ok(values)
}
