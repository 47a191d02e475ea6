//! The truncated quadratic robust loss and its batch evaluation.
//!
//! `l(d; rho) = min(||d||^2 / (p rho^2) - F, 0)` is zero outside the ball of
//! radius `R = rho sqrt(p F)` and bottoms out at `-F` for `d = 0`. The total
//! loss of a query sums `l` over every row of the data, including the query
//! itself when it is a row.

use rayon::prelude::*;

use crate::distance::squared_distance_within;
use crate::error::{Error, Result};
use crate::model::{DataMatrix, ScrlmParams};

/// Queries evaluated together in one pass over the data rows.
const QUERY_BLOCK: usize = 8;

/// `p * rho^2`, the denominator of the per-observation loss.
#[inline]
pub fn loss_scale(p: usize, rho: f64) -> f64 {
    p as f64 * rho * rho
}

/// `R = rho * sqrt(p * F)`.
pub fn support_radius(rho: f64, p: usize, f_const: f64) -> f64 {
    rho * (p as f64 * f_const).sqrt()
}

#[inline(always)]
pub(crate) fn observation_loss(d_sq: f64, scale: f64, f_const: f64) -> f64 {
    (d_sq / scale - f_const).min(0.0)
}

/// Per-observation loss for a squared distance `d_sq` in dimension `p`.
pub fn per_observation_loss(d_sq: f64, p: usize, rho: f64, f_const: f64) -> Result<f64> {
    if !d_sq.is_finite() || d_sq < 0.0 {
        return Err(Error::invalid(format!(
            "squared distance must be finite and non-negative, got {d_sq}"
        )));
    }
    if p == 0 {
        return Err(Error::invalid("dimension p must be at least 1"));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    if !(f_const.is_finite() && f_const > 0.0) {
        return Err(Error::invalid(format!("f_const must be positive, got {f_const}")));
    }
    Ok(observation_loss(d_sq, loss_scale(p, rho), f_const))
}

/// Sum of per-observation losses of `query` against every row of `data`.
pub fn total_loss(query: &[f64], data: &DataMatrix, params: &ScrlmParams) -> Result<f64> {
    params.validate()?;
    if query.len() != data.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: data.n_cols(),
            found: query.len(),
        });
    }
    let mut out = [0.0];
    block_losses(&[query], data, params.rho, params.f_const, &mut out);
    Ok(out[0])
}

/// Total loss of each row `data[i]`, `i` in `rows`, against all of `data`.
///
/// Runs in parallel over blocks of queries; each query's sum is taken over
/// the data rows in ascending order, so the output does not depend on the
/// number of threads.
pub fn row_losses(data: &DataMatrix, rows: &[usize], rho: f64, f_const: f64) -> Vec<f64> {
    let mut out = vec![0.0; rows.len()];
    out.par_chunks_mut(QUERY_BLOCK)
        .zip(rows.par_chunks(QUERY_BLOCK))
        .for_each(|(dst, idx)| {
            let queries: Vec<&[f64]> = idx.iter().map(|&i| data.row(i)).collect();
            block_losses(&queries, data, rho, f_const, dst);
        });
    out
}

/// Total loss of each row of `queries` against all of `data`.
pub fn query_losses(queries: &DataMatrix, data: &DataMatrix, params: &ScrlmParams) -> Result<Vec<f64>> {
    params.validate()?;
    if queries.n_cols() != data.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: data.n_cols(),
            found: queries.n_cols(),
        });
    }
    let all: Vec<&[f64]> = queries.rows().collect();
    let mut out = vec![0.0; all.len()];
    out.par_chunks_mut(QUERY_BLOCK)
        .zip(all.par_chunks(QUERY_BLOCK))
        .for_each(|(dst, q)| block_losses(q, data, params.rho, params.f_const, dst));
    Ok(out)
}

fn block_losses(queries: &[&[f64]], data: &DataMatrix, rho: f64, f_const: f64, out: &mut [f64]) {
    let scale = loss_scale(data.n_cols(), rho);
    let outside = |d: f64| d / scale - f_const >= 0.0;
    out.fill(0.0);
    for row in data.rows() {
        for (acc, q) in out.iter_mut().zip(queries) {
            // Rows outside the support contribute exactly zero.
            if let Some(d_sq) = squared_distance_within(q, row, outside) {
                *acc += observation_loss(d_sq, scale, f_const);
            }
        }
    }
}
