//! Repeated-fit experiments over parameter grids.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{kmeans_pp, scrlm_kmeans, KmeansParams};
use crate::bounds::{assumption1_holds, bound_report, corollary7_satisfied, BoundInputs, BoundReport};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, accuracy_outliers_as_class, purity};
use crate::model::ScrlmParams;
use crate::rng::{derive_seed, stream};
use crate::scrlm::fit;
use crate::synthgen::{paper_sigma_schedule, sample, GmmConfig};

use super::spec::{CellParams, ExperimentKind, ExperimentSpec, FlagRule};

/// Scores of the k-means baselines on one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineScores {
    /// Outlier label fixed; the baselines never predict it.
    pub kmeanspp_accuracy: f64,
    /// Outliers scored as one extra class.
    pub kmeanspp_accuracy_outlier_class: f64,
    pub scrlm_kmeans_accuracy: Option<f64>,
    pub scrlm_kmeans_accuracy_outlier_class: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub repetition: usize,
    pub data_seed: u64,
    pub accuracy: f64,
    pub purity: f64,
    pub num_clusters: usize,
    pub stopped_early: bool,
    pub baselines: Option<BaselineScores>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub kmeanspp_mean_accuracy: f64,
    pub kmeanspp_mean_accuracy_outlier_class: f64,
    /// Mean over runs where SCRLM found at least one center.
    pub scrlm_kmeans_mean_accuracy: Option<f64>,
    pub scrlm_kmeans_mean_accuracy_outlier_class: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCellResult {
    pub cell_index: usize,
    pub axis_values: BTreeMap<String, f64>,
    pub params: CellParams,
    pub sigma_max: f64,
    pub repetitions: usize,
    /// Runs with accuracy exactly 1.
    pub success_count: usize,
    /// `success_count >= ceil(0.99 * repetitions)`.
    pub experimentally_successful: bool,
    pub theoretical_region_flag: bool,
    pub mean_accuracy: f64,
    pub mean_purity: f64,
    pub mean_runtime_seconds: f64,
    /// Reason the cell was not run, e.g. `n > N`.
    pub skipped: Option<String>,
    pub baselines: Option<BaselineSummary>,
    pub runs: Vec<RunRecord>,
}

/// Runs needed for a cell to count as experimentally successful.
pub fn success_threshold(repetitions: usize) -> usize {
    (99 * repetitions).div_ceil(100)
}

pub fn theoretical_flag(rule: FlagRule, c: &CellParams, sigma_max: f64) -> bool {
    let bandwidth = assumption1_holds(sigma_max, c.rho);
    match rule {
        FlagRule::Assumption1 => bandwidth,
        FlagRule::Full => {
            bandwidth
                && corollary7_satisfied(c.n_samples, c.p, c.m, c.subsample_size, c.a, c.delta)
                    .unwrap_or(false)
        }
    }
}

fn skip_reason(c: &CellParams) -> Option<String> {
    (c.subsample_size > c.n_samples).then(|| format!("subsample size {} exceeds N = {}", c.subsample_size, c.n_samples))
}

/// One repetition of one cell. Seeds derive from `(master, cell, rep, stream)`.
pub fn run_once(spec: &ExperimentSpec, cell: usize, rep: usize, c: &CellParams) -> Result<RunRecord> {
    let path = |s: u64| derive_seed(spec.master_seed, &[cell as u64, rep as u64, s]);
    let data_seed = path(stream::DATA);
    let config = GmmConfig::with_schedules(c.m, c.p, c.n_samples, c.outlier_weight, data_seed);
    let ds = sample(&config)?;
    let params = ScrlmParams {
        rho: c.rho,
        f_const: c.f_const,
        subsample_size: c.subsample_size,
        max_clusters: c.max_clusters,
        seed: path(stream::SUBSAMPLE),
    };

    let start = Instant::now();
    let res = fit(&ds.data, &params)?;
    let runtime_seconds = start.elapsed().as_secs_f64();

    let baselines = if spec.compare_kmeans() {
        let km = KmeansParams::new(c.m + 1, path(stream::KMEANS));
        let pp = kmeans_pp(&ds.data, &km)?;
        let (sk, sk_oc) = match scrlm_kmeans(&ds.data, &params, &km) {
            Ok(r) => (
                Some(accuracy(&ds.true_labels, &r.kmeans.labels)?),
                Some(accuracy_outliers_as_class(&ds.true_labels, &r.kmeans.labels)?),
            ),
            Err(Error::NoClusters) => (None, None),
            Err(e) => return Err(e),
        };
        Some(BaselineScores {
            kmeanspp_accuracy: accuracy(&ds.true_labels, &pp.labels)?,
            kmeanspp_accuracy_outlier_class: accuracy_outliers_as_class(&ds.true_labels, &pp.labels)?,
            scrlm_kmeans_accuracy: sk,
            scrlm_kmeans_accuracy_outlier_class: sk_oc,
        })
    } else {
        None
    };

    Ok(RunRecord {
        repetition: rep,
        data_seed,
        accuracy: accuracy(&ds.true_labels, &res.labels)?,
        purity: purity(&ds.true_labels, &res.labels)?,
        num_clusters: res.num_clusters,
        stopped_early: res.stopped_early,
        baselines,
        runtime_seconds,
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn mean_opt(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    (!v.is_empty()).then(|| mean(v.into_iter()))
}

fn summarize(
    spec: &ExperimentSpec,
    cell: usize,
    c: CellParams,
    skipped: Option<String>,
    runs: Vec<RunRecord>,
) -> GridCellResult {
    let sigma_max = paper_sigma_schedule(c.m).into_iter().fold(0.0, f64::max);
    let success_count = runs.iter().filter(|r| r.accuracy == 1.0).count();
    let baselines = spec.compare_kmeans().then(|| {
        let b: Vec<BaselineScores> = runs.iter().filter_map(|r| r.baselines).collect();
        BaselineSummary {
            kmeanspp_mean_accuracy: mean(b.iter().map(|s| s.kmeanspp_accuracy)),
            kmeanspp_mean_accuracy_outlier_class: mean(b.iter().map(|s| s.kmeanspp_accuracy_outlier_class)),
            scrlm_kmeans_mean_accuracy: mean_opt(b.iter().map(|s| s.scrlm_kmeans_accuracy)),
            scrlm_kmeans_mean_accuracy_outlier_class: mean_opt(
                b.iter().map(|s| s.scrlm_kmeans_accuracy_outlier_class),
            ),
        }
    });
    GridCellResult {
        cell_index: cell,
        axis_values: spec
            .cell_coordinates(cell)
            .into_iter()
            .map(|(n, v)| (n.as_str().to_string(), v))
            .collect(),
        params: c,
        sigma_max,
        repetitions: spec.repetitions,
        success_count,
        experimentally_successful: skipped.is_none() && success_count >= success_threshold(spec.repetitions),
        theoretical_region_flag: theoretical_flag(spec.flag_rule(), &c, sigma_max),
        mean_accuracy: mean(runs.iter().map(|r| r.accuracy)),
        mean_purity: mean(runs.iter().map(|r| r.purity)),
        mean_runtime_seconds: mean(runs.iter().map(|r| r.runtime_seconds)),
        skipped,
        baselines,
        runs,
    }
}

/// Runs every (cell, repetition) pair. Jobs run in parallel in batches
/// whose datasets fit in `memory_budget_mb`; results are keyed by cell
/// and repetition, so the output does not depend on scheduling.
pub fn run_cells(spec: &ExperimentSpec) -> Result<Vec<GridCellResult>> {
    spec.validate()?;
    let cells: Vec<CellParams> = (0..spec.num_cells())
        .map(|i| spec.cell_params(i))
        .collect::<Result<_>>()?;
    let skipped: Vec<Option<String>> = cells.iter().map(skip_reason).collect();

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .filter(|&c| skipped[c].is_none())
        .flat_map(|c| (0..spec.repetitions).map(move |r| (c, r)))
        .collect();
    let budget = spec.memory_budget_mb.max(1) as f64 * 1024.0 * 1024.0;
    let bytes = |c: usize| 8.0 * cells[c].n_samples as f64 * cells[c].p as f64;

    let mut runs: Vec<Vec<RunRecord>> = vec![Vec::new(); cells.len()];
    let mut start = 0;
    while start < jobs.len() {
        let mut end = start + 1;
        let mut used = bytes(jobs[start].0);
        while end < jobs.len() && used + bytes(jobs[end].0) <= budget {
            used += bytes(jobs[end].0);
            end += 1;
        }
        let batch: Vec<(usize, RunRecord)> = jobs[start..end]
            .par_iter()
            .map(|&(c, r)| run_once(spec, c, r, &cells[c]).map(|rec| (c, rec)))
            .collect::<Result<_>>()?;
        for (c, rec) in batch {
            runs[c].push(rec);
        }
        start = end;
        log::debug!("{}/{} runs done", start, jobs.len());
    }

    Ok(cells
        .into_iter()
        .zip(skipped)
        .zip(runs)
        .enumerate()
        .map(|(i, ((c, s), mut r))| {
            r.sort_by_key(|x| x.repetition);
            let out = summarize(spec, i, c, s, r);
            log::info!(
                "cell {} {:?}: {}/{} perfect, flag {}",
                i,
                out.axis_values,
                out.success_count,
                out.repetitions,
                out.theoretical_region_flag
            );
            out
        })
        .collect())
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::Spec(format!("expected kind {kind:?}, got {:?}", spec.kind)));
    }
    Ok(())
}

pub fn run_phase_grid(spec: &ExperimentSpec) -> Result<Vec<GridCellResult>> {
    expect_kind(spec, ExperimentKind::PhaseGrid)?;
    run_cells(spec)
}

pub fn run_rho_stability(spec: &ExperimentSpec) -> Result<Vec<GridCellResult>> {
    expect_kind(spec, ExperimentKind::RhoStability)?;
    if !spec.axes.iter().any(|a| a.name == super::spec::AxisName::Rho) {
        return Err(Error::Spec("rho_stability needs a rho axis".into()));
    }
    run_cells(spec)
}

pub fn run_outlier_sweep(spec: &ExperimentSpec) -> Result<Vec<GridCellResult>> {
    expect_kind(spec, ExperimentKind::OutlierSweep)?;
    run_cells(spec)
}

pub fn run_single(spec: &ExperimentSpec) -> Result<GridCellResult> {
    expect_kind(spec, ExperimentKind::SingleRun)?;
    Ok(run_cells(spec)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCell {
    pub cell_index: usize,
    pub axis_values: BTreeMap<String, f64>,
    pub report: BoundReport,
    pub assumption1: bool,
}

pub fn run_bounds_report(spec: &ExperimentSpec) -> Result<Vec<BoundCell>> {
    expect_kind(spec, ExperimentKind::BoundsReport)?;
    spec.validate()?;
    (0..spec.num_cells())
        .map(|i| {
            let c = spec.cell_params(i)?;
            let sigma_max = paper_sigma_schedule(c.m).into_iter().fold(0.0, f64::max);
            Ok(BoundCell {
                cell_index: i,
                axis_values: spec
                    .cell_coordinates(i)
                    .into_iter()
                    .map(|(n, v)| (n.as_str().to_string(), v))
                    .collect(),
                report: bound_report(BoundInputs {
                    n_total: c.n_samples,
                    p: c.p,
                    m: c.m,
                    n: c.subsample_size,
                    a: c.a,
                    delta: c.delta,
                })?,
                assumption1: assumption1_holds(sigma_max, c.rho),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(success_threshold(100), 99);
        assert_eq!(success_threshold(10), 10);
        assert_eq!(success_threshold(1), 1);
        assert_eq!(success_threshold(200), 198);
    }
}
