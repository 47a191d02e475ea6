//! Wall-time scaling of `fit` along one parameter at a time.
//!
//! Every timed fit runs on a single-thread pool so that the measured time
//! tracks the operation count rather than the scheduler.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ScrlmParams;
use crate::rng::{derive_seed, stream};
use crate::scrlm::fit;
use crate::synthgen::{sample, GmmConfig};

use super::spec::{Axis, CellParams, ExperimentKind, ExperimentSpec, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub axis: String,
    pub value: f64,
    pub params: CellParams,
    pub num_clusters: usize,
    /// `n N p + N m p`, the distance-coordinate count of one fit.
    pub model_ops: f64,
    /// Fastest of `repetitions` timed fits.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingSlope {
    pub axis: String,
    pub points: usize,
    /// Least-squares slope of `ln(wall_seconds)` on `ln(value)`.
    pub slope: f64,
    /// Least-squares slope of `ln(wall_seconds)` on `ln(model_ops)`.
    pub slope_vs_model_ops: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    pub slopes: Vec<TimingSlope>,
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn run_timing_scaling(spec: &ExperimentSpec) -> Result<TimingReport> {
    if spec.kind != ExperimentKind::TimingScaling {
        return Err(Error::Spec(format!("expected kind TimingScaling, got {:?}", spec.kind)));
    }
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;

    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (k, axis) in spec.axes.iter().enumerate() {
        let values = axis.grid.values();
        let start = rows.len();
        for (j, &v) in values.iter().enumerate() {
            let mut single = spec.clone();
            single.axes = vec![Axis {
                name: axis.name,
                grid: Grid::Values { values: vec![v] },
            }];
            let c = single.cell_params(0)?;
            let seed = |s: u64| derive_seed(spec.master_seed, &[k as u64, j as u64, s]);
            let ds = sample(&GmmConfig::with_schedules(c.m, c.p, c.n_samples, c.outlier_weight, seed(stream::DATA)))?;
            let params = ScrlmParams {
                rho: c.rho,
                f_const: c.f_const,
                subsample_size: c.subsample_size.min(c.n_samples),
                max_clusters: c.max_clusters,
                seed: seed(stream::SUBSAMPLE),
            };
            let (best, num_clusters) = pool.install(|| -> Result<(f64, usize)> {
                let warm = fit(&ds.data, &params)?;
                let mut best = f64::INFINITY;
                for _ in 0..spec.repetitions {
                    let t = Instant::now();
                    let r = fit(&ds.data, &params)?;
                    best = best.min(t.elapsed().as_secs_f64());
                    std::hint::black_box(r);
                }
                Ok((best, warm.num_clusters))
            })?;
            let (n, nt, p, m) = (params.subsample_size as f64, c.n_samples as f64, c.p as f64, c.m as f64);
            log::info!("timing {}={v}: {best:.6}s", axis.name.as_str());
            rows.push(TimingRow {
                axis: axis.name.as_str().to_string(),
                value: v,
                params: c,
                num_clusters,
                model_ops: n * nt * p + nt * m * p,
                wall_seconds: best,
            });
        }
        let sweep = &rows[start..];
        if sweep.len() >= 2 {
            let t: Vec<f64> = sweep.iter().map(|r| r.wall_seconds).collect();
            let x: Vec<f64> = sweep.iter().map(|r| r.value).collect();
            let ops: Vec<f64> = sweep.iter().map(|r| r.model_ops).collect();
            slopes.push(TimingSlope {
                axis: axis.name.as_str().to_string(),
                points: sweep.len(),
                slope: loglog_slope(&x, &t),
                slope_vs_model_ops: loglog_slope(&ops, &t),
            });
        }
    }
    Ok(TimingReport { rows, slopes })
}
