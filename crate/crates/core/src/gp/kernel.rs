use super::{GpParams, KernelSpec, Matern};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

/// Length-scale-weighted distance r = sqrt(Σ ((x_k - x2_k) / ℓ_k)²).
#[inline]
pub(crate) fn scaled_distance(x: &[f64], x2: &[f64], lengthscales: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..x.len() {
        let d = (x[k] - x2[k]) / lengthscales[k];
        s += d * d;
    }
    s.sqrt()
}

/// Matérn correlation g(r) with g(0) = 1.
#[inline]
pub(crate) fn matern_profile(r: f64, smoothness: Matern) -> f64 {
    // r == 0 short-circuits to 1 so gradient code never sees 0 · ∞.
    if r == 0.0 {
        return 1.0;
    }
    match smoothness {
        Matern::Half => (-r).exp(),
        Matern::ThreeHalves => {
            let t = SQRT_3 * r;
            (1.0 + t) * (-t).exp()
        }
        Matern::FiveHalves => {
            let t = SQRT_5 * r;
            (1.0 + t + 5.0 * r * r / 3.0) * (-t).exp()
        }
    }
}

/// d g / d r of the Matérn correlation profile.
#[inline]
pub(crate) fn matern_profile_dr(r: f64, smoothness: Matern) -> f64 {
    match smoothness {
        Matern::Half => -(-r).exp(),
        Matern::ThreeHalves => -3.0 * r * (-SQRT_3 * r).exp(),
        Matern::FiveHalves => -(5.0 * r / 3.0) * (1.0 + SQRT_5 * r) * (-SQRT_5 * r).exp(),
    }
}

#[inline]
pub(crate) fn matern_unchecked(x: &[f64], x2: &[f64], params: &GpParams, spec: KernelSpec) -> f64 {
    let r = scaled_distance(x, x2, &params.lengthscales);
    params.signal_variance * matern_profile(r, spec.smoothness)
}

/// Matérn covariance σ² g(r) between two points. Symmetric in its arguments.
pub fn matern_cov(x: &[f64], x2: &[f64], params: &GpParams, spec: KernelSpec) -> Result<f64> {
    params.validate()?;
    if x.len() != params.dim() || x2.len() != params.dim() {
        return Err(Error::invalid_argument(format!(
            "point dimensions ({}, {}) do not match {} lengthscales",
            x.len(),
            x2.len(),
            params.dim()
        )));
    }
    Ok(matern_unchecked(x, x2, params, spec))
}

/// L×L covariance matrix of the rows of `xs`; `add_noise` puts the noise
/// variance on the diagonal. Symmetric by construction.
pub fn gram_matrix(
    xs: &DMatrix<f64>,
    params: &GpParams,
    spec: KernelSpec,
    add_noise: bool,
) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = xs.nrows();
    if n == 0 {
        return Err(Error::invalid_argument("gram matrix of zero points"));
    }
    if xs.ncols() != params.dim() {
        return Err(Error::invalid_argument(format!(
            "input dimension {} does not match {} lengthscales",
            xs.ncols(),
            params.dim()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| xs.row(i).iter().cloned().collect()).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = matern_unchecked(&rows[i], &rows[j], params, spec);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        if add_noise {
            k[(i, i)] += params.noise_variance;
        }
    }
    Ok(k)
}

/// Cross-covariance between the rows of `a` (Q points) and `b` (L points).
pub(crate) fn cross_covariance(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    params: &GpParams,
    spec: KernelSpec,
) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(a.nrows(), b.nrows());
    let a_rows: Vec<Vec<f64>> = (0..a.nrows())
        .map(|i| a.row(i).iter().cloned().collect())
        .collect();
    let b_rows: Vec<Vec<f64>> = (0..b.nrows())
        .map(|i| b.row(i).iter().cloned().collect())
        .collect();
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            k[(i, j)] = matern_unchecked(&a_rows[i], &b_rows[j], params, spec);
        }
    }
    k
}
