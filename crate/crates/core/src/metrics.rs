//! Permutation-matched accuracy and purity.
//!
//! Accuracy counts positions where the predicted label equals the true
//! label after the best relabeling of the positive predicted clusters onto
//! the positive true classes. The outlier label `-1` is never permuted: a
//! predicted `-1` only matches a true `-1`. Purity treats the predicted `-1`
//! group as one more cluster and credits each predicted cluster with its
//! largest overlap with any true class (outliers included).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LabelVector, OUTLIER};

/// Counts of (predicted, true) label pairs. Row and column 0 hold the
/// outlier label; the remaining rows/columns follow the ascending order of
/// the distinct positive labels present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
    pub pred_labels: Vec<i32>,
    pub true_labels: Vec<i32>,
}

fn positive_index(labels: &[i32]) -> BTreeMap<i32, usize> {
    let mut map: BTreeMap<i32, usize> = labels
        .iter()
        .filter(|&&l| l != OUTLIER)
        .map(|&l| (l, 0))
        .collect();
    for (i, v) in map.values_mut().enumerate() {
        *v = i + 1;
    }
    map
}

impl ConfusionMatrix {
    pub fn new(true_labels: &LabelVector, pred_labels: &LabelVector) -> Result<Self> {
        if true_labels.len() != pred_labels.len() {
            return Err(Error::invalid(format!(
                "label vectors differ in length: {} vs {}",
                true_labels.len(),
                pred_labels.len()
            )));
        }
        if true_labels.is_empty() {
            return Err(Error::invalid("label vectors are empty"));
        }
        let t_idx = positive_index(true_labels.as_slice());
        let p_idx = positive_index(pred_labels.as_slice());
        let lookup = |m: &BTreeMap<i32, usize>, l: i32| if l == OUTLIER { 0 } else { m[&l] };

        let mut counts = vec![vec![0usize; t_idx.len() + 1]; p_idx.len() + 1];
        for (&t, &p) in true_labels.as_slice().iter().zip(pred_labels.as_slice()) {
            counts[lookup(&p_idx, p)][lookup(&t_idx, t)] += 1;
        }
        Ok(Self {
            counts,
            pred_labels: std::iter::once(OUTLIER).chain(p_idx.into_keys()).collect(),
            true_labels: std::iter::once(OUTLIER).chain(t_idx.into_keys()).collect(),
        })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Largest number of matches over relabelings of the positive predicted clusters.
    pub fn matched_count(&self) -> usize {
        let outliers = self.counts[0][0];
        let benefit: Vec<Vec<f64>> = self.counts[1..]
            .iter()
            .map(|row| row[1..].iter().map(|&c| c as f64).collect())
            .collect();
        if benefit.is_empty() || benefit[0].is_empty() {
            return outliers;
        }
        let best = hungarian_assign(&benefit, true).expect("count matrix is finite and rectangular");
        outliers + best.value.round() as usize
    }
}

/// Fraction of observations matched under the best relabeling of positive clusters.
pub fn accuracy(true_labels: &LabelVector, pred_labels: &LabelVector) -> Result<f64> {
    let cm = ConfusionMatrix::new(true_labels, pred_labels)?;
    Ok(cm.matched_count() as f64 / cm.total() as f64)
}

/// Accuracy after relabeling outliers, in both vectors, as one extra
/// positive class. Used to score methods that have no outlier label.
pub fn accuracy_outliers_as_class(true_labels: &LabelVector, pred_labels: &LabelVector) -> Result<f64> {
    let extra = true_labels.max_label().max(pred_labels.max_label()) as i32 + 1;
    let lift = |v: &LabelVector| {
        LabelVector::new(v.as_slice().iter().map(|&l| if l == OUTLIER { extra } else { l }).collect())
    };
    accuracy(&lift(true_labels)?, &lift(pred_labels)?)
}

/// Purity: summed size of each predicted cluster's largest true class, over `N`.
pub fn purity(true_labels: &LabelVector, pred_labels: &LabelVector) -> Result<f64> {
    let cm = ConfusionMatrix::new(true_labels, pred_labels)?;
    let hits: usize = cm
        .counts
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / cm.total() as f64)
}

/// Optimal assignment of rows to columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// Column assigned to each row; `None` when a row of a wide-short
    /// matrix was matched to padding.
    pub row_to_col: Vec<Option<usize>>,
    /// Sum of the matched entries of the original matrix, in row order.
    pub value: f64,
}

/// Solves the linear assignment problem on `matrix` (rows of equal length),
/// minimizing the total or maximizing it when `maximize` is set.
/// Rectangular inputs are padded to square with zero entries.
///
/// Shortest augmenting paths with row/column potentials, `O(K^3)`.
pub fn hungarian_assign(matrix: &[Vec<f64>], maximize: bool) -> Result<Assignment> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if let Some(r) = matrix.iter().position(|r| r.len() != cols) {
        return Err(Error::invalid(format!("row {r} has a different length")));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("assignment matrix has non-finite entries"));
    }
    if rows == 0 || cols == 0 {
        return Ok(Assignment {
            row_to_col: vec![None; rows],
            value: 0.0,
        });
    }

    let k = rows.max(cols);
    let sign = if maximize { -1.0 } else { 1.0 };
    // 1-based with a sentinel column 0.
    let cost = |i: usize, j: usize| -> f64 {
        if i <= rows && j <= cols {
            sign * matrix[i - 1][j - 1]
        } else {
            0.0
        }
    };

    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut owner = vec![0usize; k + 1]; // row matched to column j
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=k {
                if used[j] {
                    continue;
                }
                let cur = cost(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        // Augment along the alternating path.
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; rows];
    for j in 1..=k {
        let i = owner[j];
        if i >= 1 && i <= rows && j <= cols {
            row_to_col[i - 1] = Some(j - 1);
        }
    }
    let value = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|j| matrix[i][j]))
        .sum();
    Ok(Assignment { row_to_col, value })
}
