//! Shared numeric types: the observation matrix, label vectors, SCRLM
//! parameters and the fitted cluster model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of an observation that belongs to no positive cluster.
pub const OUTLIER: i32 = -1;

/// Default loss constant `F`.
pub const DEFAULT_F: f64 = 2.5;

/// Dense `N x p` matrix of observations stored row-major in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::invalid(format!(
                "data matrix must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        let expected = n_rows.checked_mul(n_cols).ok_or_else(|| {
            Error::invalid(format!("data matrix {n_rows}x{n_cols} overflows usize"))
        })?;
        if values.len() != expected {
            return Err(Error::invalid(format!(
                "data matrix {n_rows}x{n_cols} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at row {}, column {}",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    /// Builds a matrix from equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {n_cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), n_cols, values)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Per-observation labels in `{-1} ∪ {1, 2, ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct LabelVector(Vec<i32>);

impl LabelVector {
    pub fn new(labels: Vec<i32>) -> Result<Self> {
        if let Some((i, &l)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l != OUTLIER && l < 1)
        {
            return Err(Error::invalid(format!(
                "label {l} at position {i} is neither -1 nor positive"
            )));
        }
        Ok(Self(labels))
    }

    pub fn all_outliers(n: usize) -> Self {
        Self(vec![OUTLIER; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    /// Largest positive label, or 0 when every label is an outlier.
    pub fn max_label(&self) -> usize {
        self.0.iter().copied().max().filter(|&l| l > 0).unwrap_or(0) as usize
    }

    /// True when the positive labels present are exactly `1..=max_label`.
    pub fn is_contiguous(&self) -> bool {
        let k = self.max_label();
        let mut seen = vec![false; k + 1];
        for &l in &self.0 {
            if l > 0 {
                seen[l as usize] = true;
            }
        }
        seen.iter().skip(1).all(|&s| s)
    }

    pub fn count(&self, label: i32) -> usize {
        self.0.iter().filter(|&&l| l == label).count()
    }
}

impl TryFrom<Vec<i32>> for LabelVector {
    type Error = Error;

    fn try_from(v: Vec<i32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LabelVector> for Vec<i32> {
    fn from(v: LabelVector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for LabelVector {
    type Output = i32;

    fn index(&self, i: usize) -> &i32 {
        &self.0[i]
    }
}

/// Parameters of one SCRLM fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrlmParams {
    /// Bandwidth `rho` of the robust loss.
    pub rho: f64,
    /// Loss floor constant `F`.
    pub f_const: f64,
    /// Number `n` of candidate centers sampled without replacement.
    pub subsample_size: usize,
    /// Maximum number `T` of extracted clusters.
    pub max_clusters: usize,
    pub seed: u64,
}

impl ScrlmParams {
    pub fn new(rho: f64, subsample_size: usize, max_clusters: usize, seed: u64) -> Self {
        Self {
            rho,
            f_const: DEFAULT_F,
            subsample_size,
            max_clusters,
            seed,
        }
    }

    pub fn with_f_const(mut self, f_const: f64) -> Self {
        self.f_const = f_const;
        self
    }

    /// Checks the dataset-independent invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.f_const.is_finite() && self.f_const > 0.0) {
            return Err(Error::invalid(format!(
                "f_const must be positive, got {}",
                self.f_const
            )));
        }
        if self.subsample_size == 0 {
            return Err(Error::invalid("subsample_size must be at least 1"));
        }
        if self.max_clusters == 0 {
            return Err(Error::invalid("max_clusters must be at least 1"));
        }
        Ok(())
    }

    /// Checks the invariants against a dataset with `n_rows` observations.
    pub fn validate_for(&self, n_rows: usize) -> Result<()> {
        self.validate()?;
        if self.subsample_size > n_rows {
            return Err(Error::invalid(format!(
                "subsample_size {} exceeds the number of observations {n_rows}",
                self.subsample_size
            )));
        }
        Ok(())
    }
}

/// Centers discovered by SCRLM together with the loss support radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Centers `mu_1..mu_m` in discovery order.
    pub centers: Vec<Vec<f64>>,
    /// `R = rho * sqrt(p * F)`.
    pub radius: f64,
    /// `p * rho^2 * F`, the squared radius used for all membership tests.
    pub radius_sq: f64,
    pub dimension: usize,
}

impl ClusterModel {
    pub fn empty(dimension: usize, rho: f64, f_const: f64) -> Self {
        Self {
            centers: Vec::new(),
            radius: crate::loss::support_radius(rho, dimension, f_const),
            radius_sq: crate::loss::loss_scale(dimension, rho) * f_const,
            dimension,
        }
    }

    pub fn num_clusters(&self) -> usize {
        self.centers.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_matrix_rejects_bad_shapes() {
        assert!(DataMatrix::new(0, 2, vec![]).is_err());
        assert!(DataMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DataMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DataMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());

        let m = DataMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (2, 2));
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn labels_accept_only_outlier_or_positive() {
        assert!(LabelVector::new(vec![-1, 1, 2]).is_ok());
        assert!(LabelVector::new(vec![0]).is_err());
        assert!(LabelVector::new(vec![-2]).is_err());
        let l = LabelVector::new(vec![1, 3, -1]).unwrap();
        assert_eq!(l.max_label(), 3);
        assert!(!l.is_contiguous());
        assert!(LabelVector::new(vec![2, 1, -1]).unwrap().is_contiguous());
        assert_eq!(LabelVector::all_outliers(3).max_label(), 0);
    }

    #[test]
    fn params_validation() {
        let p = ScrlmParams::new(0.5, 10, 3, 1);
        assert_eq!(p.f_const, DEFAULT_F);
        assert!(p.validate_for(10).is_ok());
        assert!(p.validate_for(9).is_err());
        assert!(ScrlmParams::new(0.0, 1, 1, 0).validate().is_err());
        assert!(ScrlmParams::new(1.0, 0, 1, 0).validate().is_err());
        assert!(ScrlmParams::new(1.0, 1, 0, 0).validate().is_err());
        assert!(ScrlmParams::new(1.0, 1, 1, 0)
            .with_f_const(-1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn label_vector_serde_validates() {
        let ok: LabelVector = serde_json::from_str("[1,-1,2]").unwrap();
        assert_eq!(ok.as_slice(), &[1, -1, 2]);
        assert!(serde_json::from_str::<LabelVector>("[0]").is_err());
    }
}
