use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use scrlm_core::bounds::{assumption1_holds, bound_report, corollary7_thresholds, BoundInputs};
use scrlm_core::harness::io::{save_csv, Dataset};
use scrlm_core::harness::{
    canonical_json, load_dataset, preset, run_experiment, save_dataset, CsvOptions, DatasetFormat, ExperimentSpec,
    Scale,
};
use scrlm_core::synthgen::{paper_sigma_schedule, paper_weight_schedule, sample, GmmConfig};
use scrlm_core::{accuracy, fit, purity, ConfusionMatrix, DataMatrix, Error, LabelVector, ScrlmParams, DEFAULT_F};

use crate::config::{self, ConfigError};
use crate::{BoundsArgs, Cli, Command, EvalArgs, ExperimentArgs, FitArgs, GenArgs};

/// Missing or contradictory command-line input; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| usage(format!("--{flag} is required (flag or config file)")))
}

/// 2 for invalid input, 3 for IO and file-format failures, 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() || e.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_validation() => 2,
        Some(err) if err.is_io() => 3,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Fit(a) => cmd_fit(config::merge_fit(a, cfg.fit)),
        Command::Gen(a) => cmd_gen(config::merge_gen(a, cfg.gen)),
        Command::Eval(a) => cmd_eval(config::merge_eval(a, cfg.eval)),
        Command::Bounds(a) => cmd_bounds(config::merge_bounds(a, cfg.bounds)),
        Command::Experiment(a) => cmd_experiment(a),
    }
}

fn format_for(path: &Path, flag: Option<&str>) -> Result<DatasetFormat> {
    match flag {
        Some(f) => Ok(f.parse::<DatasetFormat>()?),
        None => Ok(DatasetFormat::from_path(path)),
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io { path: p.to_path_buf(), source }.into()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn parse_count(raw: &str, flag: &str) -> Result<Option<usize>> {
    if raw == "auto" {
        return Ok(None);
    }
    raw.parse::<usize>()
        .map(Some)
        .map_err(|_| usage(format!("--{flag} must be a positive integer or \"auto\", got {raw:?}")))
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let input = required(a.input, "input")?;
    let format = format_for(&input, a.format.as_deref())?;
    let Dataset { data, labels } = load_dataset(
        &input,
        format,
        CsvOptions {
            labels: a.labels,
            header: a.header,
        },
    )?;
    let n_rows = data.n_rows();

    let subsample_size = match a.subsample_size.as_deref().map(|s| parse_count(s, "subsample-size")).transpose()? {
        Some(Some(n)) => n,
        Some(None) => {
            let m = required(a.m, "m")?;
            let t = corollary7_thresholds(n_rows, m, a.a.unwrap_or(0.8), a.delta.unwrap_or(0.01))?;
            t.n_min.min(n_rows)
        }
        None => n_rows,
    };
    let max_clusters = match a.max_clusters.as_deref().map(|s| parse_count(s, "max-clusters")).transpose()? {
        Some(Some(t)) => t,
        _ => n_rows,
    };
    let params = ScrlmParams::new(a.rho.unwrap_or(0.5), subsample_size, max_clusters, a.seed.unwrap_or(0))
        .with_f_const(a.f_const.unwrap_or(DEFAULT_F));
    let res = fit(&data, &params)?;

    if let Some(path) = &a.labels_out {
        write_labels(path, &res.labels)?;
    }
    let scores = match &labels {
        Some(t) => Some(json!({
            "accuracy": accuracy(t, &res.labels)?,
            "purity": purity(t, &res.labels)?,
        })),
        None => None,
    };
    write_json(
        a.output.as_deref(),
        &json!({ "params": params, "result": res, "scores": scores }),
    )
}

fn write_labels(path: &Path, labels: &LabelVector) -> Result<()> {
    let mut text = String::with_capacity(labels.len() * 3);
    for l in labels.as_slice() {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    write_text(Some(path), &text)
}

fn read_labels(path: &Path) -> Result<LabelVector> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut out = Vec::new();
    let mut offset = 0u64;
    for line in text.split_inclusive('\n') {
        let field = line.trim();
        if !field.is_empty() && !field.starts_with('#') {
            let l: i32 = field.parse().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                offset,
                message: format!("not an integer label: {field:?}"),
            })?;
            out.push(l);
        }
        offset += line.len() as u64;
    }
    Ok(LabelVector::new(out)?)
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let m = required(a.m, "m")?;
    let output: PathBuf = required(a.output, "output")?;
    let outlier_weight = a.outlier_weight.unwrap_or(0.0);
    let config = GmmConfig {
        m,
        p: required(a.p, "p")?,
        n_samples: required(a.n_samples, "n-samples")?,
        outlier_weight,
        cluster_weights: a.cluster_weights.unwrap_or_else(|| paper_weight_schedule(m, outlier_weight)),
        cluster_sigmas: a.cluster_sigmas.unwrap_or_else(|| paper_sigma_schedule(m)),
        seed: a.seed.unwrap_or(0),
    };
    let ds = sample(&config)?;
    let format = format_for(&output, a.format.as_deref())?;
    let labels = (!a.no_labels).then_some(&ds.true_labels);
    save_dataset(&output, format, &ds.data, labels)?;
    if let Some(path) = &a.centers_out {
        let centers = DataMatrix::from_rows(&ds.true_centers)?;
        save_csv(path, &centers, None)?;
    }
    let counts: Vec<usize> = std::iter::once(-1)
        .chain(1..=m as i32)
        .map(|l| ds.true_labels.count(l))
        .collect();
    write_json(
        None,
        &json!({ "output": output, "config": config, "label_counts": counts }),
    )
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let t = read_labels(&required(a.true_labels, "true-labels")?)?;
    let p = read_labels(&required(a.pred_labels, "pred-labels")?)?;
    let cm = ConfusionMatrix::new(&t, &p)?;
    write_json(
        None,
        &json!({
            "n": t.len(),
            "accuracy": accuracy(&t, &p)?,
            "purity": purity(&t, &p)?,
            "confusion": cm,
        }),
    )
}

fn cmd_bounds(a: BoundsArgs) -> Result<()> {
    let n_total = required(a.n_samples, "n-samples")?;
    let m = required(a.m, "m")?;
    let (aa, delta) = (a.a.unwrap_or(0.8), a.delta.unwrap_or(0.01));
    let n = match a.subsample_size {
        Some(n) => n,
        None => corollary7_thresholds(n_total, m, aa, delta)?.n_min,
    };
    let report = bound_report(BoundInputs {
        n_total,
        p: required(a.p, "p")?,
        m,
        n,
        a: aa,
        delta,
    })?;
    let assumption1 = match (a.sigma_max, a.rho) {
        (Some(s), Some(r)) => Some(assumption1_holds(s, r)),
        _ => None,
    };
    write_json(None, &json!({ "report": report, "assumption1": assumption1 }))
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let mut spec = match (&a.spec, &a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            ExperimentSpec::from_toml(&text).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(name)) => preset(name, if a.full_scale { Scale::Full } else { Scale::Desk })?,
        (None, None) => return Err(usage("one of --spec or --preset is required")),
    };
    if let Some(s) = a.master_seed {
        spec.master_seed = s;
    }
    if let Some(r) = a.repetitions {
        spec.repetitions = r;
    }
    spec.validate()?;
    if a.print_spec {
        return write_text(None, &spec.to_toml());
    }

    let report = run_experiment(&spec)?;
    if let Some(cells) = &report.cells {
        for c in cells {
            eprintln!(
                "{:?} success {}/{} mean_acc {:.4} theoretical {} experimental {}{}",
                c.axis_values,
                c.success_count,
                c.repetitions,
                c.mean_accuracy,
                c.theoretical_region_flag,
                c.experimentally_successful,
                c.skipped.as_deref().map(|s| format!(" (skipped: {s})")).unwrap_or_default()
            );
        }
    }
    if let Some(t) = &report.timing {
        for s in &t.slopes {
            eprintln!("slope vs {}: {:.3} ({} points)", s.axis, s.slope, s.points);
        }
    }
    if a.canonical {
        write_text(a.output.as_deref(), &(canonical_json(&report) + "\n"))
    } else {
        write_json(a.output.as_deref(), &report)
    }
}
