mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Robust clustering of Gaussian mixtures with outliers.
#[derive(Parser, Debug)]
#[command(name = "scrlm", version, about)]
pub struct Cli {
    /// TOML file with `[fit]`, `[gen]`, `[eval]` and `[bounds]` tables;
    /// keys match the long flag names with `-` written as `_`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cluster a dataset and print the result as JSON.
    Fit(FitArgs),
    /// Sample a synthetic dataset with ground-truth labels.
    Gen(GenArgs),
    /// Score predicted labels against true labels.
    Eval(EvalArgs),
    /// Probability lower bound and minimum parameters for perfect recovery.
    Bounds(BoundsArgs),
    /// Run an experiment spec or preset and write the JSON report.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Default)]
pub struct FitArgs {
    /// Dataset file (CSV, or binary when the extension is .scrm/.bin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// csv or binary; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// The last CSV column holds true labels; accuracy and purity are reported.
    #[arg(long)]
    pub labels: bool,
    /// Skip the first CSV line.
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub f_const: Option<f64>,
    /// Subsample size n, or "auto" for the bound-derived minimum (needs --m).
    #[arg(long)]
    pub subsample_size: Option<String>,
    /// Maximum number of clusters T, or "auto" for T = N.
    #[arg(long)]
    pub max_clusters: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Expected number of clusters, used only by subsample_size = "auto".
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write one predicted label per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct GenArgs {
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub outlier_weight: Option<f64>,
    /// Comma-separated cluster weights; linear from 0.8/m to 1.2/m of the inlier mass when omitted.
    #[arg(long, value_delimiter = ',')]
    pub cluster_weights: Option<Vec<f64>>,
    /// Comma-separated cluster sigmas; linear from 1/16 to 1/4 when omitted.
    #[arg(long, value_delimiter = ',')]
    pub cluster_sigmas: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    /// Leave out the label column / label block.
    #[arg(long)]
    pub no_labels: bool,
    /// Also write the true centers as CSV.
    #[arg(long)]
    pub centers_out: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct EvalArgs {
    /// File with one true label per line.
    #[arg(long)]
    pub true_labels: Option<PathBuf>,
    /// File with one predicted label per line.
    #[arg(long)]
    pub pred_labels: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Subsample size; the minimum from the bounds when omitted.
    #[arg(long)]
    pub subsample_size: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct ExperimentArgs {
    /// TOML experiment spec.
    #[arg(long, conflicts_with = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in spec: phase_grid, looseness, rho_stability, outlier_sweep,
    /// timing_scaling or bounds_report.
    #[arg(long)]
    pub preset: Option<String>,
    /// Use the full-scale grids of the preset.
    #[arg(long)]
    pub full_scale: bool,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Drop timestamps and wall times from the written JSON.
    #[arg(long)]
    pub canonical: bool,
    /// Print the resolved spec as TOML and exit.
    #[arg(long)]
    pub print_spec: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
