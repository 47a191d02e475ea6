//! Built-in experiment specs.
//!
//! Desk-scale presets fit a workstation: `p <= 4096`, `N <= 2^14`. The
//! full-scale ones use the large study grids (`p` up to 8192, `N` up
//! to about `10^5`, `m` up to 64) and need far more memory and time.

use crate::error::{Error, Result};

use super::spec::{Axis, AxisName, BaseParams, CountRule, ExperimentKind, ExperimentSpec, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

pub const PRESET_NAMES: &[&str] = &[
    "phase_grid",
    "looseness",
    "rho_stability",
    "outlier_sweep",
    "timing_scaling",
    "bounds_report",
];

fn values(name: AxisName, v: &[f64]) -> Axis {
    Axis {
        name,
        grid: Grid::Values { values: v.to_vec() },
    }
}

fn pow2(name: AxisName, from: i32, to: i32) -> Axis {
    Axis {
        name,
        grid: Grid::Exponential { base: 2.0, from, to },
    }
}

fn base(m: usize, p: usize, n_samples: usize) -> BaseParams {
    BaseParams {
        m,
        p,
        n_samples,
        ..BaseParams::default()
    }
}

/// Looks up a preset by name.
pub fn preset(name: &str, scale: Scale) -> Result<ExperimentSpec> {
    use AxisName::*;
    let full = scale == Scale::Full;
    if full {
        log::warn!("full-scale preset {name:?}: expect hours of runtime and tens of GB of memory");
    }
    let mut spec = match name {
        "phase_grid" => ExperimentSpec::new(
            ExperimentKind::PhaseGrid,
            base(3, 512, 1024),
            if full {
                vec![pow2(P, 6, 13), pow2(NSamples, 5, 17)]
            } else {
                vec![values(M, &[2.0, 3.0, 5.0]), pow2(P, 9, 12), pow2(NSamples, 7, 14)]
            },
        ),
        "looseness" => ExperimentSpec::new(
            ExperimentKind::PhaseGrid,
            base(3, 512, if full { 20000 } else { 4096 }),
            vec![values(P, &[512.0])],
        ),
        "rho_stability" => ExperimentSpec::new(
            ExperimentKind::RhoStability,
            if full { base(3, 3700, 20000) } else { base(3, 1024, 1024) },
            vec![values(Rho, &[0.20, 0.25, 0.27, 0.40, 0.60, 0.75, 0.80])],
        ),
        "outlier_sweep" => ExperimentSpec::new(
            ExperimentKind::OutlierSweep,
            BaseParams {
                outlier_weight: 0.5,
                max_clusters: CountRule::Auto,
                ..base(3, 1024, 1000)
            },
            if full {
                vec![values(M, &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0])]
            } else {
                vec![values(M, &[3.0, 5.0, 10.0])]
            },
        ),
        "timing_scaling" => {
            let mut s = ExperimentSpec::new(
                ExperimentKind::TimingScaling,
                base(3, 256, 2048),
                if full {
                    vec![pow2(NSamples, 11, 17), pow2(P, 8, 14), pow2(M, 1, 6)]
                } else {
                    vec![pow2(NSamples, 11, 15), pow2(P, 8, 12), pow2(M, 1, 4)]
                },
            );
            s.repetitions = 5;
            s
        }
        "bounds_report" => ExperimentSpec::new(
            ExperimentKind::BoundsReport,
            base(3, 3700, 20000),
            vec![values(M, &[1.0, 2.0, 3.0, 5.0, 10.0]), pow2(NSamples, 7, 17)],
        ),
        other => {
            return Err(Error::Spec(format!(
                "unknown preset {other:?}; known: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    spec.name = name.to_string();
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in PRESET_NAMES {
            preset(name, Scale::Desk).unwrap();
            preset(name, Scale::Full).unwrap();
        }
        assert!(preset("nope", Scale::Desk).is_err());
        assert_eq!(preset("phase_grid", Scale::Desk).unwrap().num_cells(), 96);
    }
}
