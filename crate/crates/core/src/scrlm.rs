//! Scalable clustering by robust loss minimization (SCRLM).
//!
//! A fit runs in three stages:
//!
//! 1. draw `n` candidate indices `S` without replacement;
//! 2. evaluate the total robust loss of every candidate once, then repeatedly
//!    take the candidate of smallest loss as a new center while that loss is
//!    below `-F`, dropping from `S` every candidate strictly inside radius `R`
//!    of the new center (at most `T` times);
//! 3. label every observation with its nearest center when that center is
//!    strictly closer than `R`, and `-1` otherwise.
//!
//! Loss values are never recomputed after removals. Ties in every argmin go
//! to the lowest index (data row index for candidates, discovery order for
//! centers), which makes a fit a pure function of the data and parameters.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::squared_distance_within;
use crate::error::{Error, Result};
use crate::loss::row_losses;
use crate::model::{ClusterModel, DataMatrix, LabelVector, ScrlmParams, OUTLIER};
use crate::rng::rng_from_seed;

/// Outcome of [`fit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrlmResult {
    pub model: ClusterModel,
    pub labels: LabelVector,
    pub num_clusters: usize,
    /// The sampled candidate set `S`, ascending.
    pub subsample_indices: Vec<usize>,
    /// True when extraction ended because no remaining candidate had loss
    /// below `-F` (or none remained), false when it ran all `T` rounds.
    pub stopped_early: bool,
    /// Data row of each center, in discovery order.
    pub center_indices: Vec<usize>,
    /// Total loss of each center at the time it was selected.
    pub center_losses: Vec<f64>,
}

/// Centers and bookkeeping produced by the extraction loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub model: ClusterModel,
    /// Candidates still in `S` when the loop ended, ascending.
    pub remaining: Vec<usize>,
    pub center_indices: Vec<usize>,
    pub center_losses: Vec<f64>,
    pub stopped_early: bool,
}

/// Draws `n_sub` distinct indices from `0..n_total` with a partial
/// Fisher-Yates shuffle, returned in ascending order.
pub fn subsample_indices(n_total: usize, n_sub: usize, seed: u64) -> Result<Vec<usize>> {
    if n_sub == 0 || n_sub > n_total {
        return Err(Error::invalid(format!(
            "cannot draw {n_sub} of {n_total} indices without replacement"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut pool: Vec<usize> = (0..n_total).collect();
    for i in 0..n_sub {
        let j = rng.random_range(i..n_total);
        pool.swap(i, j);
    }
    pool.truncate(n_sub);
    pool.sort_unstable();
    Ok(pool)
}

/// Draws the candidate set from `params.seed` and runs the extraction loop.
pub fn extract_centers(data: &DataMatrix, params: &ScrlmParams) -> Result<Extraction> {
    params.validate_for(data.n_rows())?;
    let subsample = subsample_indices(data.n_rows(), params.subsample_size, params.seed)?;
    extract_from_subsample(data, &subsample, params)
}

/// Runs the extraction loop over an explicit candidate set.
pub fn extract_from_subsample(
    data: &DataMatrix,
    subsample: &[usize],
    params: &ScrlmParams,
) -> Result<Extraction> {
    params.validate()?;
    if let Some(&bad) = subsample.iter().find(|&&i| i >= data.n_rows()) {
        return Err(Error::invalid(format!(
            "subsample index {bad} out of range for {} rows",
            data.n_rows()
        )));
    }
    let mut model = ClusterModel::empty(data.n_cols(), params.rho, params.f_const);
    let radius_sq = model.radius_sq;
    let losses = row_losses(data, subsample, params.rho, params.f_const);

    let mut alive: Vec<(usize, f64)> = subsample.iter().copied().zip(losses).collect();
    alive.sort_unstable_by_key(|&(i, _)| i);
    alive.dedup_by_key(|&mut (i, _)| i);

    let mut center_indices = Vec::new();
    let mut center_losses = Vec::new();
    let mut stopped_early = true;

    for round in 0..params.max_clusters {
        // `alive` is sorted by index, so the first minimum wins ties.
        let best = alive
            .iter()
            .copied()
            .reduce(|best, cur| if cur.1 < best.1 { cur } else { best });
        let Some((k, loss)) = best else { break };
        if !(loss < -params.f_const) {
            break;
        }
        let center = data.row(k);
        alive.retain(|&(i, _)| {
            squared_distance_within(data.row(i), center, |d| d >= radius_sq).is_none()
        });
        model.centers.push(center.to_vec());
        center_indices.push(k);
        center_losses.push(loss);
        if round + 1 == params.max_clusters {
            stopped_early = false;
        }
    }

    Ok(Extraction {
        model,
        remaining: alive.into_iter().map(|(i, _)| i).collect(),
        center_indices,
        center_losses,
        stopped_early,
    })
}

/// Labels each row with its nearest center (1-based) when strictly inside
/// the support radius, else `-1`.
pub fn assign_labels(data: &DataMatrix, model: &ClusterModel) -> Result<LabelVector> {
    if model.dimension != data.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: data.n_cols(),
        });
    }
    if let Some(c) = model.centers.iter().find(|c| c.len() != model.dimension) {
        return Err(Error::DimensionMismatch {
            expected: model.dimension,
            found: c.len(),
        });
    }
    let labels: Vec<i32> = (0..data.n_rows())
        .into_par_iter()
        .map(|i| nearest_within(data.row(i), &model.centers, model.radius_sq))
        .collect();
    LabelVector::new(labels)
}

// Seeding the running minimum with R^2 gives the nearest center when it is
// strictly inside R and nothing otherwise; ties keep the earlier center.
fn nearest_within(x: &[f64], centers: &[Vec<f64>], radius_sq: f64) -> i32 {
    let mut best = radius_sq;
    let mut label = OUTLIER;
    for (j, c) in centers.iter().enumerate() {
        if let Some(d) = squared_distance_within(x, c, |d| d >= best) {
            best = d;
            label = j as i32 + 1;
        }
    }
    label
}

/// Runs the full algorithm: subsample, extract centers, assign labels.
pub fn fit(data: &DataMatrix, params: &ScrlmParams) -> Result<ScrlmResult> {
    params.validate_for(data.n_rows())?;
    let subsample = subsample_indices(data.n_rows(), params.subsample_size, params.seed)?;
    let ex = extract_from_subsample(data, &subsample, params)?;
    let labels = assign_labels(data, &ex.model)?;
    Ok(ScrlmResult {
        num_clusters: ex.model.num_clusters(),
        model: ex.model,
        labels,
        subsample_indices: subsample,
        stopped_early: ex.stopped_early,
        center_indices: ex.center_indices,
        center_losses: ex.center_losses,
    })
}
