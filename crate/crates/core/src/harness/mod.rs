//! Dataset IO, experiment specs, grid runners and result reports.

pub mod grid;
pub mod io;
pub mod presets;
pub mod report;
pub mod spec;
pub mod timing;

pub use grid::{
    run_bounds_report, run_cells, run_once, run_outlier_sweep, run_phase_grid, run_rho_stability, run_single,
    success_threshold, theoretical_flag, GridCellResult, RunRecord,
};
pub use io::{load_dataset, save_dataset, save_results, CsvOptions, Dataset, DatasetFormat};
pub use presets::{preset, Scale, PRESET_NAMES};
pub use report::{canonical_json, run_experiment, Report, SCHEMA_VERSION};
pub use spec::{Axis, AxisName, BaseParams, CountRule, ExperimentKind, ExperimentSpec, FlagRule, Grid};
pub use timing::{run_timing_scaling, TimingReport};
