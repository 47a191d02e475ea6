//! Declarative experiment specifications, read from TOML.
//!
//! ```toml
//! kind = "phase_grid"
//! repetitions = 100
//! master_seed = 7
//!
//! [base]
//! m = 3
//! p = 512
//! n_samples = 1024
//! rho = 0.5
//!
//! [[axes]]
//! name = "n_samples"
//! grid = "exponential"
//! base = 2
//! from = 7
//! to = 14
//!
//! [[axes]]
//! name = "rho"
//! grid = "values"
//! values = [0.25, 0.5]
//! ```
//!
//! `subsample_size = "auto"` (the default) uses the smallest integer
//! `n > (m/a)(ln m + ln(4/delta))`; `max_clusters = "auto"` uses `T = N`.
//! When `a` is omitted it is `m` times the smallest cluster weight.

use serde::{Deserialize, Serialize};

use crate::bounds::corollary7_thresholds;
use crate::error::{Error, Result};
use crate::model::DEFAULT_F;
use crate::synthgen::paper_weight_schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PhaseGrid,
    RhoStability,
    OutlierSweep,
    TimingScaling,
    SingleRun,
    BoundsReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    M,
    P,
    NSamples,
    Rho,
    OutlierWeight,
    SubsampleSize,
    MaxClusters,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::M => "m",
            AxisName::P => "p",
            AxisName::NSamples => "n_samples",
            AxisName::Rho => "rho",
            AxisName::OutlierWeight => "outlier_weight",
            AxisName::SubsampleSize => "subsample_size",
            AxisName::MaxClusters => "max_clusters",
        }
    }

    fn is_count(self) -> bool {
        !matches!(self, AxisName::Rho | AxisName::OutlierWeight)
    }
}

/// Values of one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "grid", rename_all = "snake_case")]
pub enum Grid {
    Values { values: Vec<f64> },
    /// `base^k` for `k` in `from..=to`.
    Exponential { base: f64, from: i32, to: i32 },
    /// `count` evenly spaced values from `start` to `stop` inclusive.
    Linear { start: f64, stop: f64, count: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Values { ref values } => values.clone(),
            Grid::Exponential { base, from, to } => (from..=to).map(|k| base.powi(k)).collect(),
            Grid::Linear { start, stop, count } => match count {
                0 => vec![],
                1 => vec![start],
                _ => (0..count)
                    .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    #[serde(flatten)]
    pub grid: Grid,
}

/// A count that is either fixed or derived from the other parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum CountRule {
    Fixed(usize),
    #[default]
    #[serde(with = "auto_keyword")]
    Auto,
}

mod auto_keyword {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("auto")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "auto" {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected \"auto\" or an integer, got {s:?}")))
        }
    }
}

/// Which conditions set a cell's theoretical flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagRule {
    /// `sigma_max <= rho < sqrt(0.6)` only.
    Assumption1,
    /// The bandwidth condition plus all four minimum-parameter conditions.
    Full,
}

fn default_f() -> f64 {
    DEFAULT_F
}
fn default_rho() -> f64 {
    0.5
}
fn default_delta() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseParams {
    pub m: usize,
    pub p: usize,
    pub n_samples: usize,
    #[serde(default)]
    pub outlier_weight: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_f")]
    pub f_const: f64,
    /// Minimum-weight constant; `m * min(w_i)` when omitted.
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub subsample_size: CountRule,
    #[serde(default)]
    pub max_clusters: CountRule,
}

impl Default for BaseParams {
    fn default() -> Self {
        Self {
            m: 3,
            p: 512,
            n_samples: 1024,
            outlier_weight: 0.0,
            rho: default_rho(),
            f_const: DEFAULT_F,
            a: None,
            delta: default_delta(),
            subsample_size: CountRule::Auto,
            max_clusters: CountRule::Auto,
        }
    }
}

fn default_repetitions() -> usize {
    100
}
fn default_memory_budget() -> usize {
    2048
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Defaults to `assumption1` for `rho_stability` and `full` otherwise.
    #[serde(default)]
    pub flag_rule: Option<FlagRule>,
    /// Also run k-means++ and SCRLM+k-means; defaults to true for `outlier_sweep`.
    #[serde(default)]
    pub compare_kmeans: Option<bool>,
    /// Upper bound on the dataset bytes held by concurrently running repetitions.
    #[serde(default = "default_memory_budget")]
    pub memory_budget_mb: usize,
    #[serde(default)]
    pub base: BaseParams,
    #[serde(default)]
    pub axes: Vec<Axis>,
}

/// Fully resolved parameters of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub m: usize,
    pub p: usize,
    pub n_samples: usize,
    pub outlier_weight: f64,
    pub rho: f64,
    pub f_const: f64,
    pub a: f64,
    pub delta: f64,
    pub subsample_size: usize,
    pub max_clusters: usize,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, base: BaseParams, axes: Vec<Axis>) -> Self {
        Self {
            kind,
            name: String::new(),
            repetitions: default_repetitions(),
            master_seed: 0,
            flag_rule: None,
            compare_kmeans: None,
            memory_budget_mb: default_memory_budget(),
            base,
            axes,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn flag_rule(&self) -> FlagRule {
        self.flag_rule.unwrap_or(match self.kind {
            ExperimentKind::RhoStability => FlagRule::Assumption1,
            _ => FlagRule::Full,
        })
    }

    pub fn compare_kmeans(&self) -> bool {
        self.compare_kmeans
            .unwrap_or(self.kind == ExperimentKind::OutlierSweep)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(m));
        if self.repetitions == 0 {
            return err("repetitions must be at least 1".into());
        }
        let needs_axes = matches!(self.kind, ExperimentKind::RhoStability | ExperimentKind::TimingScaling);
        if needs_axes && self.axes.is_empty() {
            return err(format!("{:?} needs at least one axis", self.kind));
        }
        if self.kind == ExperimentKind::SingleRun && !self.axes.is_empty() {
            return err("single_run takes no axes".into());
        }
        let mut names: Vec<AxisName> = self.axes.iter().map(|a| a.name).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return err("an axis appears twice".into());
        }
        for axis in &self.axes {
            let values = axis.grid.values();
            if values.is_empty() {
                return err(format!("axis {} is empty", axis.name.as_str()));
            }
            for v in values {
                if !v.is_finite() {
                    return err(format!("axis {} has non-finite value {v}", axis.name.as_str()));
                }
                if axis.name.is_count() && (v < 1.0 || v.fract() != 0.0) {
                    return err(format!("axis {} needs positive integers, got {v}", axis.name.as_str()));
                }
            }
        }
        // Every cell must resolve.
        for cell in 0..self.num_cells() {
            self.cell_params(cell)?;
        }
        Ok(())
    }

    pub fn axis_values(&self) -> Vec<Vec<f64>> {
        self.axes.iter().map(|a| a.grid.values()).collect()
    }

    pub fn num_cells(&self) -> usize {
        self.axis_values().iter().map(Vec::len).product()
    }

    /// Axis values of cell `index`; the last axis varies fastest.
    pub fn cell_coordinates(&self, index: usize) -> Vec<(AxisName, f64)> {
        let values = self.axis_values();
        let mut rest = index;
        let mut out = vec![(AxisName::M, 0.0); values.len()];
        for (k, vals) in values.iter().enumerate().rev() {
            out[k] = (self.axes[k].name, vals[rest % vals.len()]);
            rest /= vals.len();
        }
        out
    }

    pub fn cell_params(&self, index: usize) -> Result<CellParams> {
        let b = &self.base;
        let (mut m, mut p, mut n_samples) = (b.m, b.p, b.n_samples);
        let (mut rho, mut outlier_weight) = (b.rho, b.outlier_weight);
        let (mut sub, mut t) = (b.subsample_size, b.max_clusters);
        for (name, v) in self.cell_coordinates(index) {
            match name {
                AxisName::M => m = v as usize,
                AxisName::P => p = v as usize,
                AxisName::NSamples => n_samples = v as usize,
                AxisName::Rho => rho = v,
                AxisName::OutlierWeight => outlier_weight = v,
                AxisName::SubsampleSize => sub = CountRule::Fixed(v as usize),
                AxisName::MaxClusters => t = CountRule::Fixed(v as usize),
            }
        }
        let bad = |m: String| Error::Spec(format!("cell {index}: {m}"));
        if m == 0 || p == 0 || n_samples == 0 {
            return Err(bad("m, p and n_samples must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&outlier_weight) {
            return Err(bad(format!("outlier_weight {outlier_weight} outside [0, 1)")));
        }
        if !(rho.is_finite() && rho > 0.0) || !(b.f_const.is_finite() && b.f_const > 0.0) {
            return Err(bad("rho and f_const must be positive".into()));
        }
        let a = match b.a {
            Some(a) => a,
            None => {
                let w = paper_weight_schedule(m, outlier_weight);
                m as f64 * w.iter().copied().fold(f64::INFINITY, f64::min)
            }
        };
        let thresholds = corollary7_thresholds(n_samples, m, a, b.delta).map_err(|e| bad(e.to_string()))?;
        let subsample_size = match sub {
            CountRule::Fixed(n) => n,
            CountRule::Auto => thresholds.n_min,
        };
        let max_clusters = match t {
            CountRule::Fixed(t) => t,
            CountRule::Auto => n_samples,
        };
        if subsample_size == 0 || max_clusters == 0 {
            return Err(bad("subsample_size and max_clusters must be at least 1".into()));
        }
        Ok(CellParams {
            m,
            p,
            n_samples,
            outlier_weight,
            rho,
            f_const: b.f_const,
            a,
            delta: b.delta,
            subsample_size,
            max_clusters,
        })
    }
}
