//! Test-only dense-algebra oracles. These deliberately avoid the Cholesky
//! code path used by the library: inverses and determinants come from plain
//! Gauss-Jordan elimination with partial pivoting.

use crate::gp::{gram_matrix, GpParams, KernelSpec, SubDataset, JITTER_BASE};
use crate::math::LOG_2PI;
use nalgebra::DMatrix;

/// Inverse and determinant via Gauss-Jordan with partial pivoting.
pub fn dense_inverse_and_det(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut inv = DMatrix::<f64>::identity(n, n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a[(r, col)].abs() > a[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            det = -det;
        }
        let p = a[(col, col)];
        assert!(p != 0.0, "singular matrix in dense oracle");
        det *= p;
        for c in 0..n {
            a[(col, c)] /= p;
            inv[(col, c)] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[(r, col)];
                if f != 0.0 {
                    for c in 0..n {
                        a[(r, c)] -= f * a[(col, c)];
                        inv[(r, c)] -= f * inv[(col, c)];
                    }
                }
            }
        }
    }
    (inv, det)
}

/// Noisy gram matrix with the same base jitter the library applies.
pub fn jittered_gram(params: &GpParams, sd: &SubDataset, spec: KernelSpec) -> DMatrix<f64> {
    let mut k = gram_matrix(sd.xs(), params, spec, true).unwrap();
    for i in 0..k.nrows() {
        k[(i, i)] += JITTER_BASE * params.signal_variance;
    }
    k
}

/// NLL through the explicit-inverse route: ½ Yᵀ K⁻¹ Y + ½ log det K + (L/2) log 2π.
pub fn dense_nll_oracle(params: &GpParams, sd: &SubDataset, spec: KernelSpec) -> f64 {
    let k = jittered_gram(params, sd, spec);
    let (inv, det) = dense_inverse_and_det(&k);
    let y = sd.ys().map(|v| v - params.constant_mean);
    let quad = (y.transpose() * &inv * &y)[(0, 0)];
    0.5 * quad + 0.5 * det.ln() + 0.5 * sd.len() as f64 * LOG_2PI
}
