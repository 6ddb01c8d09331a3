//! Super-dataset data model: synthetic generation from a hyper-prior,
//! Setup A / Setup B / predefined split logic, an external meta-dataset
//! loader, and the native on-disk format.

use crate::error::{Error, Result};
use crate::gp::{sample_function_values, GpParams, KernelSpec, SubDataset};
use crate::prior::{GammaParams, HyperPrior, NormalParams};
use crate::rng::{derive_seed, derive_seed_tagged, rng_from_seed};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// All observations within one search space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub space_id: String,
    pub dim: usize,
    pub sub_datasets: BTreeMap<String, SubDataset>,
    /// Per-dimension (min, max) used to map external inputs onto [0, 1];
    /// `None` for native data that is already unit-scaled.
    pub normalization: Option<Vec<(f64, f64)>>,
}

impl Dataset {
    fn check(&self) -> Result<()> {
        if self.sub_datasets.is_empty() {
            return Err(Error::invalid_argument(format!(
                "dataset `{}` has no sub-datasets",
                self.space_id
            )));
        }
        for (sub_id, sd) in &self.sub_datasets {
            if sd.dim() != self.dim {
                return Err(Error::invalid_argument(format!(
                    "sub-dataset `{}/{}` has dimension {} but the dataset is {}-dimensional",
                    self.space_id,
                    sub_id,
                    sd.dim(),
                    self.dim
                )));
            }
        }
        Ok(())
    }

    pub fn sub_dataset_list(&self) -> Vec<&SubDataset> {
        self.sub_datasets.values().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    External,
}

/// Train/test sub-dataset ids for one space, as shipped with external
/// benchmarks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredefinedSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// A collection of datasets spanning multiple search spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperDataset {
    pub datasets: BTreeMap<String, Dataset>,
    pub provenance: Provenance,
    pub predefined_split: Option<BTreeMap<String, PredefinedSplit>>,
}

impl SuperDataset {
    pub fn new(datasets: BTreeMap<String, Dataset>, provenance: Provenance) -> Result<Self> {
        let sd = SuperDataset {
            datasets,
            provenance,
            predefined_split: None,
        };
        sd.check()?;
        Ok(sd)
    }

    pub fn check(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::invalid_argument("super-dataset is empty"));
        }
        for (id, ds) in &self.datasets {
            if *id != ds.space_id {
                return Err(Error::invalid_argument(format!(
                    "dataset key `{id}` does not match its space_id `{}`",
                    ds.space_id
                )));
            }
            ds.check()?;
        }
        Ok(())
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_sub_datasets(&self) -> usize {
        self.datasets.values().map(|d| d.sub_datasets.len()).sum()
    }

    /// New super-dataset keeping only the given spaces.
    pub fn retain_spaces(&self, keep: &BTreeSet<String>) -> Result<SuperDataset> {
        let datasets: BTreeMap<String, Dataset> = self
            .datasets
            .iter()
            .filter(|(id, _)| keep.contains(*id))
            .map(|(id, ds)| (id.clone(), ds.clone()))
            .collect();
        let mut out = SuperDataset::new(datasets, self.provenance)?;
        out.predefined_split = self.predefined_split.clone();
        Ok(out)
    }

    /// New super-dataset without the given space (used by the
    /// leave-one-space-out variant). Errors if nothing would remain.
    pub fn without_space(&self, space_id: &str) -> Result<SuperDataset> {
        let keep: BTreeSet<String> = self
            .datasets
            .keys()
            .filter(|id| id.as_str() != space_id)
            .cloned()
            .collect();
        if keep.is_empty() {
            return Err(Error::invalid_argument(
                "cannot exclude the only search space",
            ));
        }
        self.retain_spaces(&keep)
    }
}

/// How to partition a super-dataset into train and test views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Whole datasets (search spaces) are held out.
    SetupA,
    /// Within every dataset, a fraction of sub-datasets is held out.
    SetupB,
    /// Use the train/test membership stored with the data.
    ExternalPredefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub mode: SplitMode,
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn setup_a(train_fraction: f64) -> Self {
        SplitSpec {
            mode: SplitMode::SetupA,
            train_fraction,
            seed: 0,
        }
    }

    pub fn setup_b(train_fraction: f64) -> Self {
        SplitSpec {
            mode: SplitMode::SetupB,
            train_fraction,
            seed: 0,
        }
    }

    pub fn external_predefined() -> Self {
        SplitSpec {
            mode: SplitMode::ExternalPredefined,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// The hyper-prior the synthetic experiments generate from: Normal(1, 1)
/// constant mean, Gamma(10, 30) length-scales, Gamma(1, 1) signal variance,
/// Gamma(10, 100000) noise variance (rate convention).
pub fn ground_truth_prior() -> HyperPrior {
    HyperPrior {
        constant_mean: NormalParams { mu: 1.0, sigma: 1.0 },
        lengthscale: GammaParams {
            alpha: 10.0,
            beta: 30.0,
        },
        signal_variance: GammaParams {
            alpha: 1.0,
            beta: 1.0,
        },
        noise_variance: GammaParams {
            alpha: 10.0,
            beta: 100_000.0,
        },
    }
}

/// Inputs of a generated sub-dataset live on the unit cube.
fn uniform_inputs<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, dim, |_, _| rng.random_range(0.0..1.0))
}

/// Generate a synthetic super-dataset following the hierarchical generative
/// process: per dataset draw a dimension and GP parameters from the prior,
/// then sample noisy function values at uniform inputs for each sub-dataset.
/// Also returns the generating parameters keyed by space id.
pub fn generate_synthetic_with_params(
    prior: &HyperPrior,
    n_datasets: usize,
    subdatasets_per: usize,
    obs_per: usize,
    dim_range: (usize, usize),
    seed: u64,
    spec: KernelSpec,
) -> Result<(SuperDataset, BTreeMap<String, GpParams>)> {
    let (lo, hi) = dim_range;
    if lo < 1 || hi < lo {
        return Err(Error::invalid_argument(format!(
            "invalid dimension range [{lo}, {hi}]"
        )));
    }
    if n_datasets == 0 || subdatasets_per == 0 || obs_per == 0 {
        return Err(Error::invalid_argument(
            "counts must all be at least 1 when generating",
        ));
    }

    let mut datasets = BTreeMap::new();
    let mut gen_params = BTreeMap::new();
    for i in 0..n_datasets {
        let space_id = format!("synth-{i:03}");
        let mut rng = rng_from_seed(derive_seed(seed, "dataset", i as u64));
        let dim = rng.random_range(lo..=hi);
        let params = prior.sample(dim, &mut rng);
        let mut sub_datasets = BTreeMap::new();
        for j in 0..subdatasets_per {
            let xs = uniform_inputs(obs_per, dim, &mut rng);
            let ys = sample_function_values(&params, &xs, spec, &mut rng, true)?;
            sub_datasets.insert(format!("fn-{j:03}"), SubDataset::new(xs, ys)?);
        }
        gen_params.insert(space_id.clone(), params);
        datasets.insert(
            space_id.clone(),
            Dataset {
                space_id,
                dim,
                sub_datasets,
                normalization: None,
            },
        );
    }
    Ok((
        SuperDataset::new(datasets, Provenance::Synthetic)?,
        gen_params,
    ))
}

pub fn generate_synthetic(
    prior: &HyperPrior,
    n_datasets: usize,
    subdatasets_per: usize,
    obs_per: usize,
    dim_range: (usize, usize),
    seed: u64,
    spec: KernelSpec,
) -> Result<SuperDataset> {
    generate_synthetic_with_params(
        prior,
        n_datasets,
        subdatasets_per,
        obs_per,
        dim_range,
        seed,
        spec,
    )
    .map(|(s, _)| s)
}

fn train_count(total: usize, fraction: f64, what: &str) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid_argument(format!(
            "train_fraction must lie in (0, 1), got {fraction}"
        )));
    }
    if total < 2 {
        return Err(Error::invalid_argument(format!(
            "cannot split {total} {what}: need at least 2"
        )));
    }
    Ok(((total as f64 * fraction).floor() as usize).clamp(1, total - 1))
}

/// Partition a super-dataset into train and test views.
///
/// Setup A holds out whole datasets (the lexicographically first fraction
/// trains); Setup B holds out the trailing sub-datasets within every dataset;
/// the predefined mode replays membership shipped with external data.
pub fn split(super_data: &SuperDataset, spec: &SplitSpec) -> Result<(SuperDataset, SuperDataset)> {
    match spec.mode {
        SplitMode::SetupA => {
            let ids: Vec<String> = super_data.datasets.keys().cloned().collect();
            let k = train_count(ids.len(), spec.train_fraction, "datasets")?;
            let train_ids: BTreeSet<String> = ids[..k].iter().cloned().collect();
            let test_ids: BTreeSet<String> = ids[k..].iter().cloned().collect();
            Ok((
                super_data.retain_spaces(&train_ids)?,
                super_data.retain_spaces(&test_ids)?,
            ))
        }
        SplitMode::SetupB => {
            let mut train = BTreeMap::new();
            let mut test = BTreeMap::new();
            for (id, ds) in &super_data.datasets {
                let sub_ids: Vec<String> = ds.sub_datasets.keys().cloned().collect();
                let k = train_count(
                    sub_ids.len(),
                    spec.train_fraction,
                    &format!("sub-datasets of `{id}`"),
                )?;
                let mk = |range: &[String]| Dataset {
                    space_id: ds.space_id.clone(),
                    dim: ds.dim,
                    sub_datasets: range
                        .iter()
                        .map(|s| (s.clone(), ds.sub_datasets[s].clone()))
                        .collect(),
                    normalization: ds.normalization.clone(),
                };
                train.insert(id.clone(), mk(&sub_ids[..k]));
                test.insert(id.clone(), mk(&sub_ids[k..]));
            }
            Ok((
                SuperDataset::new(train, super_data.provenance)?,
                SuperDataset::new(test, super_data.provenance)?,
            ))
        }
        SplitMode::ExternalPredefined => {
            let assignment = super_data.predefined_split.as_ref().ok_or_else(|| {
                Error::invalid_argument(
                    "external_predefined split requested but the data carries no split",
                )
            })?;
            let mut train = BTreeMap::new();
            let mut test = BTreeMap::new();
            for (id, ds) in &super_data.datasets {
                let assign = assignment.get(id).ok_or_else(|| {
                    Error::invalid_argument(format!("no predefined split for space `{id}`"))
                })?;
                let mk = |ids: &[String]| -> Result<Dataset> {
                    let mut subs = BTreeMap::new();
                    for s in ids {
                        let sd = ds.sub_datasets.get(s).ok_or_else(|| {
                            Error::invalid_argument(format!(
                                "predefined split references unknown sub-dataset `{id}/{s}`"
                            ))
                        })?;
                        subs.insert(s.clone(), sd.clone());
                    }
                    Ok(Dataset {
                        space_id: ds.space_id.clone(),
                        dim: ds.dim,
                        sub_datasets: subs,
                        normalization: ds.normalization.clone(),
                    })
                };
                if !assign.train.is_empty() {
                    train.insert(id.clone(), mk(&assign.train)?);
                }
                if !assign.test.is_empty() {
                    test.insert(id.clone(), mk(&assign.test)?);
                }
            }
            Ok((
                SuperDataset::new(train, super_data.provenance)?,
                SuperDataset::new(test, super_data.provenance)?,
            ))
        }
    }
}

/// Uniform without-replacement row subsample of min(n, L) rows, in original
/// row order. `n >= L` returns the sub-dataset unchanged.
pub fn subsample_sub_dataset(sd: &SubDataset, n: usize, seed: u64) -> Result<SubDataset> {
    if n == 0 {
        return Err(Error::invalid_argument("subsample size must be >= 1"));
    }
    if n >= sd.len() {
        return Ok(sd.clone());
    }
    let mut idx: Vec<usize> = (0..sd.len()).collect();
    let mut rng = rng_from_seed(seed);
    // partial Fisher-Yates: the first n entries are the sample
    for i in 0..n {
        let j = rng.random_range(i..idx.len());
        idx.swap(i, j);
    }
    let mut chosen = idx[..n].to_vec();
    chosen.sort_unstable();
    sd.select_rows(&chosen)
}

/// Deterministic per-(space, sub) subsample seed shared by all methods.
pub fn subsample_seed(seed: u64, space_id: &str, sub_id: &str) -> u64 {
    derive_seed_tagged(seed, &["subsample", space_id, sub_id])
}

/// Subsample every sub-dataset to at most `n` observations, seeded per
/// (seed, space, sub); used to keep desk-scale fits cheap.
pub fn thin_observations(data: &SuperDataset, n: usize, seed: u64) -> Result<SuperDataset> {
    let mut out = data.clone();
    for (space_id, ds) in out.datasets.iter_mut() {
        let mut thinned = BTreeMap::new();
        for (sub_id, sd) in &ds.sub_datasets {
            thinned.insert(
                sub_id.clone(),
                subsample_sub_dataset(sd, n, subsample_seed(seed, space_id, sub_id))?,
            );
        }
        ds.sub_datasets = thinned;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Native on-disk format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SubWire {
    Packed {
        rows: usize,
        x_b64: String,
        y_b64: String,
    },
    Plain {
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct DatasetWire {
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    normalization: Option<Vec<(f64, f64)>>,
    sub_datasets: BTreeMap<String, SubWire>,
}

#[derive(Serialize, Deserialize)]
struct SuperWire {
    provenance: Provenance,
    datasets: BTreeMap<String, DatasetWire>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    predefined_split: Option<BTreeMap<String, PredefinedSplit>>,
}

fn floats_to_b64(v: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(v.len() * 8);
    for x in v {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    BASE64.encode(bytes)
}

fn b64_to_floats(s: &str, what: &str) -> Result<Vec<f64>> {
    let bytes = BASE64.decode(s).map_err(|e| Error::Load {
        path: what.to_string(),
        reason: format!("invalid base64: {e}"),
    })?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Load {
            path: what.to_string(),
            reason: "byte length not a multiple of 8".to_string(),
        });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Serialize to the native JSON document (metadata plus base64-packed
/// little-endian f64 blocks, row-major X).
pub fn super_dataset_to_json(super_data: &SuperDataset) -> Result<String> {
    let mut datasets = BTreeMap::new();
    for (id, ds) in &super_data.datasets {
        let mut subs = BTreeMap::new();
        for (sub_id, sd) in &ds.sub_datasets {
            let mut x_flat = Vec::with_capacity(sd.len() * sd.dim());
            for i in 0..sd.len() {
                for j in 0..sd.dim() {
                    x_flat.push(sd.xs()[(i, j)]);
                }
            }
            let y: Vec<f64> = sd.ys().iter().cloned().collect();
            subs.insert(
                sub_id.clone(),
                SubWire::Packed {
                    rows: sd.len(),
                    x_b64: floats_to_b64(&x_flat),
                    y_b64: floats_to_b64(&y),
                },
            );
        }
        datasets.insert(
            id.clone(),
            DatasetWire {
                dim: ds.dim,
                normalization: ds.normalization.clone(),
                sub_datasets: subs,
            },
        );
    }
    let wire = SuperWire {
        provenance: super_data.provenance,
        datasets,
        predefined_split: super_data.predefined_split.clone(),
    };
    Ok(serde_json::to_string_pretty(&wire)?)
}

pub fn super_dataset_from_json(json: &str) -> Result<SuperDataset> {
    let wire: SuperWire = serde_json::from_str(json)?;
    let mut datasets = BTreeMap::new();
    for (id, dw) in wire.datasets {
        let mut subs = BTreeMap::new();
        for (sub_id, sw) in dw.sub_datasets {
            let tag = format!("{id}/{sub_id}");
            let sd = match sw {
                SubWire::Packed { rows, x_b64, y_b64 } => {
                    let x = b64_to_floats(&x_b64, &tag)?;
                    let y = b64_to_floats(&y_b64, &tag)?;
                    if rows == 0 || x.len() != rows * dw.dim || y.len() != rows {
                        return Err(Error::Load {
                            path: tag,
                            reason: format!(
                                "inconsistent packed sizes: rows={rows} dim={} |x|={} |y|={}",
                                dw.dim,
                                x.len(),
                                y.len()
                            ),
                        });
                    }
                    let xs = DMatrix::from_fn(rows, dw.dim, |i, j| x[i * dw.dim + j]);
                    SubDataset::new(xs, nalgebra::DVector::from_vec(y))?
                }
                SubWire::Plain { x, y } => SubDataset::from_rows(&x, &y)?,
            };
            subs.insert(sub_id, sd);
        }
        datasets.insert(
            id.clone(),
            Dataset {
                space_id: id,
                dim: dw.dim,
                sub_datasets: subs,
                normalization: dw.normalization,
            },
        );
    }
    let mut out = SuperDataset::new(datasets, wire.provenance)?;
    out.predefined_split = wire.predefined_split;
    out.check()?;
    Ok(out)
}

pub fn save_super_dataset(super_data: &SuperDataset, path: &Path) -> Result<()> {
    std::fs::write(path, super_dataset_to_json(super_data)?)?;
    Ok(())
}

pub fn load_super_dataset(path: &Path) -> Result<SuperDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    super_dataset_from_json(&text)
}

// ---------------------------------------------------------------------------
// External meta-dataset loader
// ---------------------------------------------------------------------------

fn load_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Load {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Parse an external meta-dataset: a nested JSON object
/// `space_id -> sub_id -> {"X": [[...]], "y": [...] | [[...]]}`.
///
/// Inputs are min-max normalized onto [0, 1] per dimension, pooled over the
/// whole space; the constants are kept on the dataset. A companion split file
/// (`space_id -> {"train": [...], "test": [...]}`) records predefined
/// membership.
pub fn load_external_meta(path: &Path, split_path: Option<&Path>) -> Result<SuperDataset> {
    let pstr = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| load_err(&pstr, e.to_string()))?;
    let root: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| load_err(&pstr, format!("malformed JSON: {e}")))?;
    let spaces = root
        .as_object()
        .ok_or_else(|| load_err(&pstr, "top level must be an object of search spaces"))?;
    if spaces.is_empty() {
        return Err(load_err(&pstr, "no search spaces present"));
    }

    let mut datasets = BTreeMap::new();
    for (space_id, subs_val) in spaces {
        let subs = subs_val.as_object().ok_or_else(|| {
            load_err(&pstr, format!("space `{space_id}` must map sub-dataset ids"))
        })?;
        if subs.is_empty() {
            return Err(load_err(&pstr, format!("space `{space_id}` is empty")));
        }

        let mut raw: BTreeMap<String, (Vec<Vec<f64>>, Vec<f64>)> = BTreeMap::new();
        let mut dim: Option<usize> = None;
        for (sub_id, entry) in subs {
            let at = format!("{space_id}/{sub_id}");
            let obj = entry
                .as_object()
                .ok_or_else(|| load_err(&pstr, format!("sub-dataset `{at}` must be an object")))?;
            let x_val = obj
                .get("X")
                .ok_or_else(|| load_err(&pstr, format!("sub-dataset `{at}` is missing \"X\"")))?;
            let y_val = obj
                .get("y")
                .ok_or_else(|| load_err(&pstr, format!("sub-dataset `{at}` is missing \"y\"")))?;

            let x: Vec<Vec<f64>> = serde_json::from_value(x_val.clone()).map_err(|e| {
                load_err(&pstr, format!("sub-dataset `{at}`: X is not a matrix: {e}"))
            })?;
            if x.is_empty() {
                return Err(load_err(&pstr, format!("sub-dataset `{at}`: X is empty")));
            }
            let d = x[0].len();
            if d == 0 {
                return Err(load_err(
                    &pstr,
                    format!("sub-dataset `{at}`: X rows are empty"),
                ));
            }
            if let Some(bad) = x.iter().position(|r| r.len() != d) {
                return Err(load_err(
                    &pstr,
                    format!("sub-dataset `{at}`: ragged X (row {bad} has {} columns, expected {d})", x[bad].len()),
                ));
            }

            // y may be flat or a column of singleton lists
            let y: Vec<f64> = if let Ok(flat) = serde_json::from_value::<Vec<f64>>(y_val.clone()) {
                flat
            } else {
                let nested: Vec<Vec<f64>> = serde_json::from_value(y_val.clone()).map_err(|e| {
                    load_err(&pstr, format!("sub-dataset `{at}`: y is not a vector: {e}"))
                })?;
                let mut out = Vec::with_capacity(nested.len());
                for (i, row) in nested.iter().enumerate() {
                    if row.len() != 1 {
                        return Err(load_err(
                            &pstr,
                            format!("sub-dataset `{at}`: y row {i} has {} entries, expected 1", row.len()),
                        ));
                    }
                    out.push(row[0]);
                }
                out
            };
            if y.len() != x.len() {
                return Err(load_err(
                    &pstr,
                    format!(
                        "sub-dataset `{at}`: X has {} rows but y has {} entries",
                        x.len(),
                        y.len()
                    ),
                ));
            }
            match dim {
                None => dim = Some(d),
                Some(prev) if prev != d => {
                    return Err(load_err(
                        &pstr,
                        format!(
                            "space `{space_id}`: sub-dataset `{sub_id}` has dimension {d}, others have {prev}"
                        ),
                    ))
                }
                _ => {}
            }
            raw.insert(sub_id.clone(), (x, y));
        }
        let dim = dim.unwrap();

        // Pooled per-dimension min/max over the space.
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for (x, _) in raw.values() {
            for row in x {
                for (j, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(load_err(
                            &pstr,
                            format!("space `{space_id}` contains a non-finite input"),
                        ));
                    }
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
        }
        let normalization: Vec<(f64, f64)> = lo.iter().cloned().zip(hi.iter().cloned()).collect();

        let mut sub_datasets = BTreeMap::new();
        for (sub_id, (x, y)) in raw {
            let rows = x.len();
            let xs = DMatrix::from_fn(rows, dim, |i, j| {
                let range = hi[j] - lo[j];
                if range > 0.0 {
                    (x[i][j] - lo[j]) / range
                } else {
                    0.5 // constant dimension: park at the box midpoint
                }
            });
            sub_datasets.insert(
                sub_id,
                SubDataset::new(xs, nalgebra::DVector::from_vec(y))?,
            );
        }
        datasets.insert(
            space_id.clone(),
            Dataset {
                space_id: space_id.clone(),
                dim,
                sub_datasets,
                normalization: Some(normalization),
            },
        );
    }

    let mut out = SuperDataset::new(datasets, Provenance::External)?;
    if let Some(sp) = split_path {
        let sstr = sp.display().to_string();
        let stext = std::fs::read_to_string(sp).map_err(|e| load_err(&sstr, e.to_string()))?;
        let assignment: BTreeMap<String, PredefinedSplit> = serde_json::from_str(&stext)
            .map_err(|e| load_err(&sstr, format!("malformed split file: {e}")))?;
        for (space, a) in &assignment {
            let ds = out
                .datasets
                .get(space)
                .ok_or_else(|| load_err(&sstr, format!("split references unknown space `{space}`")))?;
            for sub in a.train.iter().chain(&a.test) {
                if !ds.sub_datasets.contains_key(sub) {
                    return Err(load_err(
                        &sstr,
                        format!("split references unknown sub-dataset `{space}/{sub}`"),
                    ));
                }
            }
        }
        out.predefined_split = Some(assignment);
    }
    Ok(out)
}
