//! Versioned JSON results with plot-ready columns.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

use super::grid::{run_bounds_report, run_cells, BoundCell, GridCellResult};
use super::spec::{ExperimentKind, ExperimentSpec};
use super::timing::{run_timing_scaling, TimingReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Column-oriented data, one entry per cell (or timing row).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub axes: Vec<String>,
    pub columns: BTreeMap<String, Vec<f64>>,
}

impl PlotData {
    fn push(&mut self, key: &str, v: f64) {
        self.columns.entry(key.to_string()).or_default().push(v);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub generated_at_unix: u64,
    pub spec: ExperimentSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cells: Option<Vec<GridCellResult>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bounds: Option<Vec<BoundCell>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing: Option<TimingReport>,
    pub plot_data: PlotData,
}

fn grid_plot(spec: &ExperimentSpec, cells: &[GridCellResult]) -> PlotData {
    let mut pd = PlotData {
        axes: spec.axes.iter().map(|a| a.name.as_str().to_string()).collect(),
        ..Default::default()
    };
    for c in cells {
        for (k, v) in &c.axis_values {
            pd.push(k, *v);
        }
        pd.push("success_count", c.success_count as f64);
        pd.push("mean_accuracy", c.mean_accuracy);
        pd.push("mean_purity", c.mean_purity);
        pd.push("mean_runtime_seconds", c.mean_runtime_seconds);
        pd.push("experimental", f64::from(u8::from(c.experimentally_successful)));
        pd.push("theoretical", f64::from(u8::from(c.theoretical_region_flag)));
        pd.push("skipped", f64::from(u8::from(c.skipped.is_some())));
        if let Some(b) = &c.baselines {
            pd.push("kmeanspp_mean_accuracy", b.kmeanspp_mean_accuracy);
            pd.push("kmeanspp_mean_accuracy_outlier_class", b.kmeanspp_mean_accuracy_outlier_class);
            pd.push("scrlm_kmeans_mean_accuracy", b.scrlm_kmeans_mean_accuracy.unwrap_or(f64::NAN));
            pd.push(
                "scrlm_kmeans_mean_accuracy_outlier_class",
                b.scrlm_kmeans_mean_accuracy_outlier_class.unwrap_or(f64::NAN),
            );
        }
    }
    pd
}

fn bounds_plot(spec: &ExperimentSpec, cells: &[BoundCell]) -> PlotData {
    let mut pd = PlotData {
        axes: spec.axes.iter().map(|a| a.name.as_str().to_string()).collect(),
        ..Default::default()
    };
    for c in cells {
        for (k, v) in &c.axis_values {
            pd.push(k, *v);
        }
        let r = &c.report;
        pd.push("prob_lower_bound", r.prob_lower_bound);
        pd.push("p_min_vs_n_total", r.thresholds.p_min_vs_n_total as f64);
        pd.push("p_min_vs_m", r.thresholds.p_min_vs_m as f64);
        pd.push("n_min", r.thresholds.n_min as f64);
        pd.push("n_total_min", r.thresholds.n_total_min as f64);
        pd.push("theoretical", f64::from(u8::from(r.satisfied && c.assumption1)));
    }
    pd
}

fn timing_plot(t: &TimingReport) -> PlotData {
    let mut pd = PlotData::default();
    for r in &t.rows {
        if !pd.axes.contains(&r.axis) {
            pd.axes.push(r.axis.clone());
        }
        pd.push(&format!("{}.value", r.axis), r.value);
        pd.push(&format!("{}.model_ops", r.axis), r.model_ops);
        pd.push(&format!("{}.wall_seconds", r.axis), r.wall_seconds);
    }
    pd
}

/// Runs any experiment kind and packages the result.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report> {
    spec.validate()?;
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        spec: spec.clone(),
        cells: None,
        bounds: None,
        timing: None,
        plot_data: PlotData::default(),
    };
    match spec.kind {
        ExperimentKind::TimingScaling => {
            let t = run_timing_scaling(spec)?;
            report.plot_data = timing_plot(&t);
            report.timing = Some(t);
        }
        ExperimentKind::BoundsReport => {
            let b = run_bounds_report(spec)?;
            report.plot_data = bounds_plot(spec, &b);
            report.bounds = Some(b);
        }
        _ => {
            let cells = run_cells(spec)?;
            report.plot_data = grid_plot(spec, &cells);
            report.cells = Some(cells);
        }
    }
    Ok(report)
}

fn is_volatile(key: &str) -> bool {
    key == "generated_at_unix" || key == "slopes" || key.ends_with("seconds")
}

fn strip(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.retain(|k, _| !is_volatile(k));
            map.values_mut().for_each(strip);
        }
        Value::Array(items) => items.iter_mut().for_each(strip),
        _ => {}
    }
}

/// The report as JSON without timestamps and wall times; equal for reruns
/// with the same spec and master seed.
pub fn canonical_json(report: &Report) -> String {
    let mut v = serde_json::to_value(report).expect("report serializes");
    strip(&mut v);
    serde_json::to_string_pretty(&v).expect("value serializes")
}
