//! Exact Gaussian-process machinery: Matérn covariances with per-dimension
//! length-scales, Cholesky-based marginal likelihood and its gradient,
//! posterior prediction, and exact function sampling.

mod chol;
mod kernel;
mod likelihood;
mod posterior;
mod sample;

pub use chol::{cholesky_with_jitter, JITTER_BASE, JITTER_MAX};
pub use kernel::{gram_matrix, matern_cov};
pub use likelihood::{
    dataset_nll, dataset_nll_grad, shift_augmentation_check, sub_dataset_nll, sub_dataset_nll_grad,
    NllGradient,
};
pub use posterior::posterior;
pub use sample::sample_function_values;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Matérn smoothness ν. All experiments default to 3/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matern {
    Half,
    #[default]
    ThreeHalves,
    FiveHalves,
}

/// Covariance family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelSpec {
    pub smoothness: Matern,
}

impl KernelSpec {
    pub fn new(smoothness: Matern) -> Self {
        KernelSpec { smoothness }
    }
}

/// Parameters of one search space's GP: constant mean, ARD length-scales,
/// signal variance and observation-noise variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub constant_mean: f64,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl GpParams {
    pub fn new(
        constant_mean: f64,
        lengthscales: Vec<f64>,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let p = GpParams {
            constant_mean,
            lengthscales,
            signal_variance,
            noise_variance,
        };
        p.validate()?;
        Ok(p)
    }

    /// Isotropic helper: the same length-scale in every dimension.
    pub fn isotropic(
        constant_mean: f64,
        lengthscale: f64,
        dim: usize,
        signal_variance: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        Self::new(
            constant_mean,
            vec![lengthscale; dim],
            signal_variance,
            noise_variance,
        )
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.constant_mean.is_finite() {
            return Err(Error::invalid_argument("constant_mean must be finite"));
        }
        if self.lengthscales.is_empty() {
            return Err(Error::invalid_argument("lengthscales must be nonempty"));
        }
        for (i, &l) in self.lengthscales.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid_argument(format!(
                    "lengthscales[{i}] must be strictly positive and finite, got {l}"
                )));
            }
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "signal_variance must be strictly positive and finite, got {}",
                self.signal_variance
            )));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "noise_variance must be strictly positive and finite, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }
}

/// Observations on one function: an L×d input matrix plus an L output vector.
/// Always nonempty, finite, with d ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SubDataset {
    xs: DMatrix<f64>,
    ys: DVector<f64>,
}

impl SubDataset {
    pub fn new(xs: DMatrix<f64>, ys: DVector<f64>) -> Result<Self> {
        if xs.nrows() == 0 {
            return Err(Error::invalid_argument("sub-dataset must be nonempty"));
        }
        if xs.ncols() == 0 {
            return Err(Error::invalid_argument("input dimension must be >= 1"));
        }
        if xs.nrows() != ys.len() {
            return Err(Error::invalid_argument(format!(
                "inputs have {} rows but outputs have {} entries",
                xs.nrows(),
                ys.len()
            )));
        }
        if xs.iter().any(|v| !v.is_finite()) || ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument(
                "sub-dataset contains non-finite values",
            ));
        }
        Ok(SubDataset { xs, ys })
    }

    pub fn from_rows(rows: &[Vec<f64>], ys: &[f64]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_argument("sub-dataset must be nonempty"));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid_argument("ragged input rows"));
        }
        let xs = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
        Self::new(xs, DVector::from_column_slice(ys))
    }

    pub fn len(&self) -> usize {
        self.xs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: L >= 1
    }

    pub fn dim(&self) -> usize {
        self.xs.ncols()
    }

    pub fn xs(&self) -> &DMatrix<f64> {
        &self.xs
    }

    pub fn ys(&self) -> &DVector<f64> {
        &self.ys
    }

    pub fn input_row(&self, i: usize) -> Vec<f64> {
        self.xs.row(i).iter().cloned().collect()
    }

    /// New sub-dataset restricted to the given rows (order preserved as given).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_argument("row selection must be nonempty"));
        }
        let xs = DMatrix::from_fn(rows.len(), self.dim(), |i, j| self.xs[(rows[i], j)]);
        let ys = DVector::from_fn(rows.len(), |i, _| self.ys[rows[i]]);
        SubDataset::new(xs, ys)
    }

    /// Translate every input by `shift` (used by the block-diagonal check).
    pub fn shift_inputs(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::invalid_argument("shift dimension mismatch"));
        }
        let mut xs = self.xs.clone();
        for i in 0..xs.nrows() {
            for j in 0..xs.ncols() {
                xs[(i, j)] += shift[j];
            }
        }
        SubDataset::new(xs, self.ys.clone())
    }
}

/// Predictive means and variances at a set of query points. Variances are
/// clamped at zero after the numerical subtraction.
#[derive(Debug, Clone, PartialEq)]
pub struct GpPosterior {
    pub means: DVector<f64>,
    pub variances: DVector<f64>,
}

impl GpPosterior {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.len() == 0
    }
}

pub(crate) fn check_shared_dim(sds: &[SubDataset]) -> Result<Option<usize>> {
    let mut dim = None;
    for sd in sds {
        match dim {
            None => dim = Some(sd.dim()),
            Some(d) if d != sd.dim() => {
                return Err(Error::invalid_argument(format!(
                    "sub-datasets mix dimensions {d} and {}",
                    sd.dim()
                )))
            }
            _ => {}
        }
    }
    Ok(dim)
}
