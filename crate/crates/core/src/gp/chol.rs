use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, Dyn};

/// First jitter rung, as a multiple of the signal variance.
pub const JITTER_BASE: f64 = 1e-10;
/// Last jitter rung before giving up, as a multiple of the signal variance.
pub const JITTER_MAX: f64 = 1e-4;

/// Cholesky factorization with an escalating diagonal jitter.
///
/// `JITTER_BASE · signal_variance` is always added before the first attempt;
/// each failure multiplies the jitter by 10 up to `JITTER_MAX · signal_variance`.
/// Returns the factor together with the jitter that succeeded, so gradient
/// code can account for the perturbed diagonal.
pub fn cholesky_with_jitter(
    k: &DMatrix<f64>,
    signal_variance: f64,
) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    let mut attempted = Vec::new();
    for exponent in -10..=-4 {
        let jitter = signal_variance * 10f64.powi(exponent);
        attempted.push(jitter);
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(kj) {
            return Ok((c, jitter));
        }
    }
    Err(Error::CholeskyFailed { attempted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorizes_well_conditioned_matrix_at_base_jitter() {
        let k = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 2.0]);
        let (_, jitter) = cholesky_with_jitter(&k, 1.0).unwrap();
        assert_eq!(jitter, JITTER_BASE);
    }

    #[test]
    fn escalates_on_rank_deficiency() {
        // identical points, no noise: rank-1 matrix
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (_, jitter) = cholesky_with_jitter(&k, 1.0).unwrap();
        assert!(jitter >= JITTER_BASE);
    }

    #[test]
    fn reports_attempted_ladder_on_failure() {
        // indefinite matrix that no jitter within the ladder fixes
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 5.0, 5.0, 1.0]);
        match cholesky_with_jitter(&k, 1.0) {
            Err(Error::CholeskyFailed { attempted }) => {
                assert_eq!(attempted.len(), 7);
                assert_eq!(attempted[0], JITTER_BASE);
                assert_eq!(*attempted.last().unwrap(), JITTER_MAX);
            }
            other => panic!("expected CholeskyFailed, got {other:?}"),
        }
    }
}
