//! Scalar special functions and numerically careful helpers shared across the
//! crate: log-gamma family, standard-normal cdf/pdf, softplus reparameterization
//! and log-sum-exp.

pub const LOG_2PI: f64 = 1.837_877_066_409_345_6;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Natural log of the gamma function, valid for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Digamma ψ(x) for x > 0. Recurrence lifts the argument above 10, then the
/// asymptotic expansion applies.
pub fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // ln x - 1/(2x) - sum of Bernoulli terms
    acc + x.ln() - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}

/// Trigamma ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + inv * (1.0
        + inv * (0.5
            + inv * (1.0 / 6.0
                - inv2 * (1.0 / 30.0
                    - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0)))))))
}

/// Standard normal cumulative distribution function.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// softplus(x) = log(1 + exp(x)), overflow-safe.
pub fn softplus(x: f64) -> f64 {
    if x > 34.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Inverse of [`softplus`]: log(exp(y) - 1) for y > 0.
pub fn softplus_inv(y: f64) -> f64 {
    debug_assert!(y > 0.0);
    if y > 34.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

/// Derivative of softplus with respect to its argument: the logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(Σ exp(x_i)) with the usual max shift. Empty input and all -inf both
/// yield -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m; // empty, all -inf, or a +inf/NaN poisons the result
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + sum.ln()
}

/// Softmax of log-weights, computed in the log domain. Entries at -inf get
/// weight exactly 0. Returns `None` when every entry is -inf.
pub fn softmax_from_log(log_w: &[f64]) -> Option<Vec<f64>> {
    let lse = log_sum_exp(log_w);
    if !lse.is_finite() {
        return None;
    }
    Some(log_w.iter().map(|&w| (w - lse).exp()).collect())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (divides by n).
pub fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}
