//! The universal-prior layer: Normal and Gamma component families, sampling
//! of GP parameters, hyper-prior log density, the component MLEs used by
//! pre-training step 2, and the Monte-Carlo hierarchical NLL.
//!
//! Gamma distributions use the rate convention throughout (mean = α/β).

use crate::error::{Error, Result};
use crate::gp::{check_shared_dim, dataset_nll, GpParams, KernelSpec, SubDataset};
use crate::math::{digamma, ln_gamma, log_sum_exp, mean, trigamma, LOG_2PI};
use crate::rng::rng_from_seed;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma as GammaDist, Normal as NormalDist};
use serde::{Deserialize, Serialize};

/// Lower bound on the fitted Normal scale, so degenerate sample sets keep a
/// finite log density.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// Newton tolerance on the Gamma shape update.
const GAMMA_NEWTON_TOL: f64 = 1e-10;
const GAMMA_NEWTON_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl NormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "Normal(mu={mu}, sigma={sigma}) is not a valid distribution"
            )));
        }
        Ok(NormalParams { mu, sigma })
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        -0.5 * LOG_2PI - self.sigma.ln() - 0.5 * z * z
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        NormalDist::new(self.mu, self.sigma)
            .expect("validated on construction")
            .sample(rng)
    }
}

/// Shape/rate Gamma (mean = alpha / beta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "Gamma(alpha={alpha}, beta={beta}) is not a valid distribution"
            )));
        }
        Ok(GammaParams { alpha, beta })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Log density; out-of-support points (x ≤ 0) return -inf rather than
    /// erroring.
    pub fn log_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || !x.is_finite() {
            return f64::NEG_INFINITY;
        }
        self.alpha * self.beta.ln() - ln_gamma(self.alpha) + (self.alpha - 1.0) * x.ln()
            - self.beta * x
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // rand_distr parameterizes by shape/scale.
        GammaDist::new(self.alpha, 1.0 / self.beta)
            .expect("validated on construction")
            .sample(rng)
    }
}

/// The universal prior over GP parameters: one Normal for the constant mean
/// and one shared Gamma for every length-scale dimension, plus Gammas for the
/// signal and noise variances. Components are independent.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperPrior {
    pub constant_mean: NormalParams,
    pub lengthscale: GammaParams,
    pub signal_variance: GammaParams,
    pub noise_variance: GammaParams,
}

/// Wire format: `{"constant_mean": {...}, ..., "convention": "rate"}`.
#[derive(Serialize, Deserialize)]
struct HyperPriorWire {
    constant_mean: NormalParams,
    lengthscale: GammaParams,
    signal_variance: GammaParams,
    noise_variance: GammaParams,
    convention: String,
}

impl Serialize for HyperPrior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HyperPriorWire {
            constant_mean: self.constant_mean,
            lengthscale: self.lengthscale,
            signal_variance: self.signal_variance,
            noise_variance: self.noise_variance,
            convention: "rate".to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HyperPrior {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = HyperPriorWire::deserialize(d)?;
        if wire.convention != "rate" {
            return Err(serde::de::Error::custom(format!(
                "unsupported Gamma convention `{}` (expected `rate`)",
                wire.convention
            )));
        }
        Ok(HyperPrior {
            constant_mean: wire.constant_mean,
            lengthscale: wire.lengthscale,
            signal_variance: wire.signal_variance,
            noise_variance: wire.noise_variance,
        })
    }
}

impl HyperPrior {
    /// Draw one GP parameter set for a `dim`-dimensional search space.
    /// Sampling order is fixed: mean, length-scales, signal, noise.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> GpParams {
        let constant_mean = self.constant_mean.sample(rng);
        let lengthscales = (0..dim).map(|_| self.lengthscale.sample(rng)).collect();
        let signal_variance = self.signal_variance.sample(rng);
        let noise_variance = self.noise_variance.sample(rng);
        GpParams {
            constant_mean,
            lengthscales,
            signal_variance,
            noise_variance,
        }
    }

    /// Sum of component log densities; the length-scale term sums over the
    /// dimensions. Out-of-support parameters give -inf, never an error.
    pub fn log_density(&self, params: &GpParams) -> f64 {
        let mut total = self.constant_mean.log_pdf(params.constant_mean);
        for &l in &params.lengthscales {
            total += self.lengthscale.log_pdf(l);
        }
        total += self.signal_variance.log_pdf(params.signal_variance);
        total += self.noise_variance.log_pdf(params.noise_variance);
        total
    }
}

/// Uniform distribution over the finite set of fitted GP parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePrior {
    atoms: Vec<GpParams>,
}

impl DiscretePrior {
    pub fn new(atoms: Vec<GpParams>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid_argument(
                "discrete prior needs at least one atom",
            ));
        }
        Ok(DiscretePrior { atoms })
    }

    pub fn atoms(&self) -> &[GpParams] {
        &self.atoms
    }

    /// Draw an atom uniformly. When the stored atom's dimension differs from
    /// the requested one, length-scales are resampled i.i.d. from the atom's
    /// own pool of length-scale values; mean and variances carry over.
    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> GpParams {
        let atom = &self.atoms[rng.random_range(0..self.atoms.len())];
        if atom.dim() == dim {
            return atom.clone();
        }
        let pool = &atom.lengthscales;
        let lengthscales = (0..dim)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect();
        GpParams {
            constant_mean: atom.constant_mean,
            lengthscales,
            signal_variance: atom.signal_variance,
            noise_variance: atom.noise_variance,
        }
    }
}

/// Independent uniform ranges for each GP parameter (the non-informative
/// baseline).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformBoxPrior {
    pub constant_mean: (f64, f64),
    pub lengthscale: (f64, f64),
    pub signal_variance: (f64, f64),
    pub noise_variance: (f64, f64),
}

impl UniformBoxPrior {
    /// The non-informative ranges used by the baseline experiments.
    pub fn non_informative() -> Self {
        UniformBoxPrior {
            constant_mean: (-100.0, 100.0),
            lengthscale: (0.001, 10.0),
            signal_variance: (1e-6, 100.0),
            noise_variance: (1e-8, 100.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> GpParams {
        let u = |rng: &mut R, (lo, hi): (f64, f64)| rng.random_range(lo..hi);
        GpParams {
            constant_mean: u(rng, self.constant_mean),
            lengthscales: (0..dim).map(|_| u(rng, self.lengthscale)).collect(),
            signal_variance: u(rng, self.signal_variance),
            noise_variance: u(rng, self.noise_variance),
        }
    }
}

/// A distribution over GP parameter sets that can serve any input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSource {
    Hyper(HyperPrior),
    Discrete(DiscretePrior),
    UniformBox(UniformBoxPrior),
}

impl PriorSource {
    pub fn name(&self) -> &'static str {
        match self {
            PriorSource::Hyper(_) => "hyper",
            PriorSource::Discrete(_) => "discrete",
            PriorSource::UniformBox(_) => "uniform-box",
        }
    }
}

/// Draw GP parameters for a `dim`-dimensional space from any prior source.
pub fn sample_gp_params<R: Rng + ?Sized>(
    prior: &PriorSource,
    dim: usize,
    rng: &mut R,
) -> Result<GpParams> {
    if dim == 0 {
        return Err(Error::invalid_argument("dimension must be >= 1"));
    }
    Ok(match prior {
        PriorSource::Hyper(h) => h.sample(dim, rng),
        PriorSource::Discrete(d) => d.sample(dim, rng),
        PriorSource::UniformBox(b) => b.sample(dim, rng),
    })
}

/// Normal MLE: sample mean and population standard deviation, floored at
/// [`SIGMA_FLOOR`].
pub fn fit_normal_mle(samples: &[f64]) -> Result<NormalParams> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Normal MLE needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid_argument("non-finite sample"));
    }
    let mu = mean(samples);
    let var = samples.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / samples.len() as f64;
    Ok(NormalParams {
        mu,
        sigma: var.sqrt().max(SIGMA_FLOOR),
    })
}

/// Gamma MLE in the rate convention.
///
/// The shape solves log α − ψ(α) = s with s = log(mean) − mean(log) by Newton
/// iteration from the closed-form initializer
/// α₀ = (3 − s + sqrt((s−3)² + 24s)) / (12s); the rate is then α / mean.
pub fn fit_gamma_mle(samples: &[f64]) -> Result<GammaParams> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "Gamma MLE needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    for &x in samples {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::invalid_argument(format!(
                "Gamma MLE requires strictly positive samples, got {x}"
            )));
        }
    }
    let m = mean(samples);
    let mean_log = samples.iter().map(|x| x.ln()).sum::<f64>() / samples.len() as f64;
    let s = m.ln() - mean_log; // >= 0 by Jensen, 0 only when all samples equal
    if s < 1e-12 {
        return Err(Error::DegenerateData(
            "all samples (numerically) equal; Gamma shape is unbounded".to_string(),
        ));
    }

    let mut alpha = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..GAMMA_NEWTON_MAX_ITERS {
        let h = alpha.ln() - digamma(alpha) - s;
        let hp = 1.0 / alpha - trigamma(alpha);
        let mut next = alpha - h / hp;
        if !(next > 0.0) || !next.is_finite() {
            next = alpha / 2.0;
        }
        let delta = (next - alpha).abs();
        alpha = next;
        if delta < GAMMA_NEWTON_TOL {
            break;
        }
    }
    GammaParams::new(alpha, alpha / m)
}

/// Step 2 of pre-training: component MLEs over the per-space fits. All
/// length-scales of all spaces pool into the one shared Gamma.
pub fn fit_hyper_prior(fitted: &[GpParams]) -> Result<HyperPrior> {
    if fitted.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "hyper-prior MLE needs at least 2 fitted parameter sets, got {}",
            fitted.len()
        )));
    }
    let means: Vec<f64> = fitted.iter().map(|p| p.constant_mean).collect();
    let pooled_ls: Vec<f64> = fitted
        .iter()
        .flat_map(|p| p.lengthscales.iter().cloned())
        .collect();
    let signals: Vec<f64> = fitted.iter().map(|p| p.signal_variance).collect();
    let noises: Vec<f64> = fitted.iter().map(|p| p.noise_variance).collect();
    Ok(HyperPrior {
        constant_mean: fit_normal_mle(&means)?,
        lengthscale: fit_gamma_mle(&pooled_ls)?,
        signal_variance: fit_gamma_mle(&signals)?,
        noise_variance: fit_gamma_mle(&noises)?,
    })
}

/// Marginal-likelihood NLL of a set of sub-datasets under a prior, by Monte
/// Carlo over parameter draws:
/// −log( (1/Q) Σ_q exp(−dataset_nll(θ_q)) ), computed in the log domain.
///
/// Parameter draw q comes from an independent substream derived from
/// (rng, q), so evaluations are reproducible and order-independent. Samples
/// whose likelihood evaluation fails contribute zero mass; if every sample
/// fails the +inf sentinel is returned.
pub fn hierarchical_nll<R: RngCore + ?Sized>(
    prior: &PriorSource,
    sds: &[SubDataset],
    q_samples: usize,
    rng: &mut R,
    spec: KernelSpec,
) -> Result<f64> {
    if q_samples == 0 {
        return Err(Error::invalid_argument("q_samples must be >= 1"));
    }
    if sds.is_empty() {
        return Err(Error::invalid_argument(
            "hierarchical NLL of an empty dataset",
        ));
    }
    let dim = check_shared_dim(sds)?.unwrap();
    let base = rng.next_u64();
    let log_ps: Vec<f64> = (0..q_samples)
        .map(|q| {
            let mut sub_rng = rng_from_seed(crate::rng::derive_seed(base, "hnll", q as u64));
            match sample_gp_params(prior, dim, &mut sub_rng) {
                Ok(theta) => match dataset_nll(&theta, sds, spec) {
                    Ok(nll) => -nll,
                    Err(_) => f64::NEG_INFINITY,
                },
                Err(_) => f64::NEG_INFINITY,
            }
        })
        .collect();
    let lse = log_sum_exp(&log_ps);
    if lse == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(-(lse - (q_samples as f64).ln()))
}
