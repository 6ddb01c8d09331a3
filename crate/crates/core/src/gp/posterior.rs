use super::chol::cholesky_with_jitter;
use super::kernel::{cross_covariance, gram_matrix};
use super::{GpParams, GpPosterior, KernelSpec, SubDataset};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// GP predictive distribution at `queries` given `observed`. With no
/// observations this is the prior predictive: mean = constant mean,
/// variance = signal variance (+ noise when `include_noise`).
///
/// Conditioning always uses the noisy gram matrix; `include_noise` only
/// controls whether the observation noise is added to the returned
/// predictive variances.
pub fn posterior(
    params: &GpParams,
    observed: Option<&SubDataset>,
    queries: &DMatrix<f64>,
    spec: KernelSpec,
    include_noise: bool,
) -> Result<GpPosterior> {
    params.validate()?;
    let q = queries.nrows();
    if q == 0 {
        return Err(Error::invalid_argument("no query points"));
    }
    if queries.ncols() != params.dim() {
        return Err(Error::invalid_argument(format!(
            "query dimension {} does not match {} lengthscales",
            queries.ncols(),
            params.dim()
        )));
    }
    let noise_term = if include_noise {
        params.noise_variance
    } else {
        0.0
    };

    let observed = match observed {
        None => {
            let means = DVector::from_element(q, params.constant_mean);
            let variances = DVector::from_element(q, params.signal_variance + noise_term);
            return Ok(GpPosterior { means, variances });
        }
        Some(sd) => sd,
    };
    if observed.dim() != params.dim() {
        return Err(Error::invalid_argument(
            "observed dimension does not match lengthscales",
        ));
    }

    let k = gram_matrix(observed.xs(), params, spec, true)?;
    let (chol, _) = cholesky_with_jitter(&k, params.signal_variance)?;

    let y = observed.ys().map(|v| v - params.constant_mean);
    let alpha = chol.solve(&y);

    // k_star: Q×L cross covariance
    let k_star = cross_covariance(queries, observed.xs(), params, spec);
    let means = &k_star * &alpha + DVector::from_element(q, params.constant_mean);

    // v = L⁻¹ k_starᵀ ; predictive variance = k** − Σ v² (clamped at 0)
    let mut v = k_star.transpose();
    chol.l_dirty().solve_lower_triangular_mut(&mut v);
    let mut variances = DVector::zeros(q);
    for i in 0..q {
        let reduction: f64 = v.column(i).iter().map(|x| x * x).sum();
        let var = params.signal_variance - reduction;
        variances[i] = var.max(0.0) + noise_term;
    }

    Ok(GpPosterior { means, variances })
}
