//! Config-file values that flags override.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{BoundsArgs, EvalArgs, FitArgs, GenArgs};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub gen: GenConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
}

/// Invalid config file contents; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub fn load(path: Option<&Path>) -> anyhow::Result<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| scrlm_core::Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| {
        ConfigError {
            path: path.display().to_string(),
            message: e.to_string(),
        }
        .into()
    })
}

/// Either a number or the word "auto" in a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CountValue {
    Number(usize),
    Word(String),
}

impl CountValue {
    fn into_string(self) -> String {
        match self {
            CountValue::Number(n) => n.to_string(),
            CountValue::Word(w) => w,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub input: Option<PathBuf>,
    pub format: Option<String>,
    pub labels: Option<bool>,
    pub header: Option<bool>,
    pub rho: Option<f64>,
    pub f_const: Option<f64>,
    pub subsample_size: Option<CountValue>,
    pub max_clusters: Option<CountValue>,
    pub seed: Option<u64>,
    pub m: Option<usize>,
    pub a: Option<f64>,
    pub delta: Option<f64>,
    pub output: Option<PathBuf>,
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub m: Option<usize>,
    pub p: Option<usize>,
    pub n_samples: Option<usize>,
    pub outlier_weight: Option<f64>,
    pub cluster_weights: Option<Vec<f64>>,
    pub cluster_sigmas: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub no_labels: Option<bool>,
    pub centers_out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub true_labels: Option<PathBuf>,
    pub pred_labels: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub n_samples: Option<usize>,
    pub p: Option<usize>,
    pub m: Option<usize>,
    pub subsample_size: Option<usize>,
    pub a: Option<f64>,
    pub delta: Option<f64>,
    pub sigma_max: Option<f64>,
    pub rho: Option<f64>,
}

pub fn merge_fit(mut a: FitArgs, c: FitConfig) -> FitArgs {
    a.input = a.input.or(c.input);
    a.format = a.format.or(c.format);
    a.labels |= c.labels.unwrap_or(false);
    a.header |= c.header.unwrap_or(false);
    a.rho = a.rho.or(c.rho);
    a.f_const = a.f_const.or(c.f_const);
    a.subsample_size = a.subsample_size.or(c.subsample_size.map(CountValue::into_string));
    a.max_clusters = a.max_clusters.or(c.max_clusters.map(CountValue::into_string));
    a.seed = a.seed.or(c.seed);
    a.m = a.m.or(c.m);
    a.a = a.a.or(c.a);
    a.delta = a.delta.or(c.delta);
    a.output = a.output.or(c.output);
    a.labels_out = a.labels_out.or(c.labels_out);
    a
}

pub fn merge_gen(mut a: GenArgs, c: GenConfig) -> GenArgs {
    a.m = a.m.or(c.m);
    a.p = a.p.or(c.p);
    a.n_samples = a.n_samples.or(c.n_samples);
    a.outlier_weight = a.outlier_weight.or(c.outlier_weight);
    a.cluster_weights = a.cluster_weights.or(c.cluster_weights);
    a.cluster_sigmas = a.cluster_sigmas.or(c.cluster_sigmas);
    a.seed = a.seed.or(c.seed);
    a.output = a.output.or(c.output);
    a.format = a.format.or(c.format);
    a.no_labels |= c.no_labels.unwrap_or(false);
    a.centers_out = a.centers_out.or(c.centers_out);
    a
}

pub fn merge_eval(mut a: EvalArgs, c: EvalConfig) -> EvalArgs {
    a.true_labels = a.true_labels.or(c.true_labels);
    a.pred_labels = a.pred_labels.or(c.pred_labels);
    a
}

pub fn merge_bounds(mut a: BoundsArgs, c: BoundsConfig) -> BoundsArgs {
    a.n_samples = a.n_samples.or(c.n_samples);
    a.p = a.p.or(c.p);
    a.m = a.m.or(c.m);
    a.subsample_size = a.subsample_size.or(c.subsample_size);
    a.a = a.a.or(c.a);
    a.delta = a.delta.or(c.delta);
    a.sigma_max = a.sigma_max.or(c.sigma_max);
    a.rho = a.rho.or(c.rho);
    a
}
