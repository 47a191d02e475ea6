//! Lloyd's k-means with k-means++ seeding or SCRLM-center seeding.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::squared_distance;
use crate::error::{Error, Result};
use crate::model::{DataMatrix, LabelVector, ScrlmParams};
use crate::rng::rng_from_seed;
use crate::scrlm::{fit, ScrlmResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmeansParams {
    pub k: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl KmeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iters: 100,
            tol: 1e-6,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::invalid(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansResult {
    /// Cluster labels `1..=k`.
    pub labels: LabelVector,
    pub centers: Vec<Vec<f64>>,
    /// Sum of squared distances to the final centers.
    pub inertia: f64,
    /// Inertia after each assignment step, ending with the final one.
    pub inertia_history: Vec<f64>,
    /// Number of center updates performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Indices chosen by D^2 sampling: the first uniformly, each next one with
/// probability proportional to its squared distance to the nearest chosen
/// row. When every unchosen row coincides with a chosen one the draw falls
/// back to uniform over unchosen rows.
pub fn kmeanspp_indices(data: &DataMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.n_rows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut chosen = vec![false; n];
    let mut out = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen[first] = true;
    out.push(first);

    let mut nearest: Vec<f64> = data.rows().map(|r| squared_distance(r, data.row(first))).collect();
    while out.len() < k {
        let weights: Vec<f64> = nearest
            .iter()
            .zip(&chosen)
            .map(|(&d, &c)| if c { 0.0 } else { d })
            .collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(dist) => dist.sample(&mut rng),
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        chosen[next] = true;
        out.push(next);
        let c = data.row(next);
        nearest
            .par_iter_mut()
            .zip(data.as_slice().par_chunks_exact(data.n_cols()))
            .for_each(|(d, r)| *d = d.min(squared_distance(r, c)));
    }
    Ok(out)
}

pub fn kmeanspp_init(data: &DataMatrix, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(kmeanspp_indices(data, k, seed)?
        .into_iter()
        .map(|i| data.row(i).to_vec())
        .collect())
}

/// Nearest center (ties to the lowest index) and its squared distance.
fn assign(data: &DataMatrix, centers: &[Vec<f64>]) -> Vec<(usize, f64)> {
    data.as_slice()
        .par_chunks_exact(data.n_cols())
        .map(|row| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centers.iter().enumerate() {
                let d = squared_distance(row, c);
                if d < best.1 {
                    best = (j, d);
                }
            }
            best
        })
        .collect()
}

/// Lloyd iterations from `init_centers` until the largest center shift is at
/// most `tol` or `max_iters` updates have run. An empty cluster is reseeded
/// at the row farthest from its assigned center.
pub fn lloyd(data: &DataMatrix, init_centers: &[Vec<f64>], params: &KmeansParams) -> Result<KmeansResult> {
    params.validate()?;
    if init_centers.is_empty() {
        return Err(Error::invalid("no initial centers"));
    }
    let p = data.n_cols();
    if let Some(c) = init_centers.iter().find(|c| c.len() != p) {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: c.len(),
        });
    }
    let k = init_centers.len();
    let mut centers = init_centers.to_vec();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iters {
        let mut assigned = assign(data, &centers);
        history.push(assigned.iter().map(|a| a.1).sum());

        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for (row, &(j, _)) in data.rows().zip(&assigned) {
            counts[j] += 1;
            for (s, x) in sums[j].iter_mut().zip(row) {
                *s += x;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let far = (0..assigned.len())
                .fold(0, |b, i| if assigned[i].1 > assigned[b].1 { i } else { b });
            let old = assigned[far].0;
            if counts[old] > 1 {
                counts[old] -= 1;
                for (s, x) in sums[old].iter_mut().zip(data.row(far)) {
                    *s -= x;
                }
                counts[j] = 1;
                sums[j] = data.row(far).to_vec();
                assigned[far] = (j, 0.0);
            } else {
                // Every row already sits alone or on its center; keep the old center.
                sums[j] = centers[j].clone();
                counts[j] = 1;
            }
        }

        let mut shift: f64 = 0.0;
        for j in 0..k {
            let inv = 1.0 / counts[j] as f64;
            let new: Vec<f64> = sums[j].iter().map(|s| s * inv).collect();
            shift = shift.max(squared_distance(&new, &centers[j]).sqrt());
            centers[j] = new;
        }
        iterations += 1;
        if shift <= params.tol {
            converged = true;
            break;
        }
    }

    let assigned = assign(data, &centers);
    let inertia = assigned.iter().map(|a| a.1).sum();
    history.push(inertia);
    let labels = LabelVector::new(assigned.iter().map(|a| a.0 as i32 + 1).collect())?;
    Ok(KmeansResult {
        labels,
        centers,
        inertia,
        inertia_history: history,
        iterations,
        converged,
    })
}

/// k-means++ seeding followed by Lloyd.
pub fn kmeans_pp(data: &DataMatrix, params: &KmeansParams) -> Result<KmeansResult> {
    params.validate()?;
    let init = kmeanspp_init(data, params.k, params.seed)?;
    lloyd(data, &init, params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrlmKmeansResult {
    pub scrlm: ScrlmResult,
    pub kmeans: KmeansResult,
}

/// Lloyd started from the SCRLM centers. `kmeans_params.k` is replaced by
/// the number of discovered centers; every row gets a positive label.
pub fn scrlm_kmeans(
    data: &DataMatrix,
    scrlm_params: &ScrlmParams,
    kmeans_params: &KmeansParams,
) -> Result<ScrlmKmeansResult> {
    let scrlm = fit(data, scrlm_params)?;
    if scrlm.num_clusters == 0 {
        return Err(Error::NoClusters);
    }
    let params = KmeansParams {
        k: scrlm.num_clusters,
        ..*kmeans_params
    };
    let kmeans = lloyd(data, &scrlm.model.centers, &params)?;
    Ok(ScrlmKmeansResult { scrlm, kmeans })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> DataMatrix {
        DataMatrix::new(v.len(), 1, v.to_vec()).unwrap()
    }

    #[test]
    fn one_dimensional_example() {
        let data = col(&[0.0, 0.1, 10.0, 10.1]);
        let r = lloyd(&data, &[vec![0.0], vec![10.0]], &KmeansParams::new(2, 0)).unwrap();
        assert!((r.centers[0][0] - 0.05).abs() < 1e-12);
        assert!((r.centers[1][0] - 10.05).abs() < 1e-12);
        assert!((r.inertia - 0.01).abs() < 1e-12);
        assert_eq!(r.labels.as_slice(), &[1, 1, 2, 2]);
        assert!(r.converged);
    }

    #[test]
    fn already_at_centers() {
        let data = DataMatrix::from_rows(&[[1.0, 2.0], [5.0, 5.0], [-3.0, 0.0]]).unwrap();
        let init: Vec<Vec<f64>> = data.rows().map(<[f64]>::to_vec).collect();
        let r = lloyd(&data, &init, &KmeansParams::new(3, 0)).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn single_cluster_is_mean() {
        let data = col(&[1.0, 2.0, 3.0, 6.0]);
        let r = lloyd(&data, &[vec![100.0]], &KmeansParams::new(1, 0)).unwrap();
        assert_eq!(r.centers[0][0], 3.0);
        // N times the population variance.
        assert!((r.inertia - 14.0).abs() < 1e-12);
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        let data = col(&[0.0, 1.0, 10.0]);
        let r = lloyd(&data, &[vec![0.0], vec![-100.0]], &KmeansParams::new(2, 0)).unwrap();
        let mut c: Vec<f64> = r.centers.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.5, 10.0]);
    }

    #[test]
    fn ties_go_to_lowest_center() {
        let data = col(&[0.0]);
        let r = lloyd(&data, &[vec![-1.0], vec![1.0]], &KmeansParams { max_iters: 1, ..KmeansParams::new(2, 0) });
        assert_eq!(r.unwrap().inertia_history[0], 1.0);
        let a = assign(&data, &[vec![-1.0], vec![1.0]]);
        assert_eq!(a[0].0, 0);
    }

    #[test]
    fn kmeanspp_edges() {
        let data = col(&[0.0, 1.0, 2.0, 3.0, 3.0]);
        let mut all = kmeanspp_indices(&data, 5, 9).unwrap();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert_eq!(kmeanspp_indices(&data, 1, 9).unwrap().len(), 1);
        assert!(kmeanspp_indices(&data, 6, 9).is_err());
        assert!(kmeanspp_indices(&data, 0, 9).is_err());
        // Duplicates force the uniform fallback.
        let dup = col(&[4.0; 4]);
        let mut idx = kmeanspp_indices(&dup, 4, 1).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn kmeanspp_spreads_over_far_pairs() {
        let data = DataMatrix::from_rows(&[[0.0, 0.0], [0.0, 0.1], [100.0, 0.0], [100.0, 0.1]]).unwrap();
        let split = (0..1000u64)
            .filter(|&s| {
                let idx = kmeanspp_indices(&data, 2, s).unwrap();
                (idx[0] < 2) != (idx[1] < 2)
            })
            .count();
        assert!(split >= 990, "{split}");
    }

    #[test]
    fn scrlm_kmeans_six_points() {
        let data = DataMatrix::from_rows(&[
            [0.0, 0.0],
            [0.1, 0.0],
            [10.0, 10.0],
            [10.1, 10.0],
            [50.0, -50.0],
            [-50.0, 50.0],
        ])
        .unwrap();
        let r = scrlm_kmeans(&data, &ScrlmParams::new(1.0, 6, 6, 0), &KmeansParams::new(1, 0)).unwrap();
        assert_eq!(r.kmeans.centers.len(), 2);
        // Both outliers are absorbed by the cluster at the origin.
        assert_eq!(r.kmeans.labels.as_slice(), &[1, 1, 2, 2, 1, 1]);
        assert!((r.kmeans.centers[0][0] - 0.025).abs() < 1e-12);
        // No center found: explicit error.
        let far = DataMatrix::from_rows(&[[0.0], [100.0]]).unwrap();
        let e = scrlm_kmeans(&far, &ScrlmParams::new(1.0, 2, 2, 0), &KmeansParams::new(1, 0));
        assert!(matches!(e, Err(Error::NoClusters)));
    }

    proptest! {
        #[test]
        fn inertia_nonincreasing(pts in prop::collection::vec(prop::collection::vec(-5f64..5.0, 2), 3..40),
                                 k in 1usize..4, seed: u64) {
            let data = DataMatrix::from_rows(&pts).unwrap();
            let k = k.min(pts.len());
            let params = KmeansParams::new(k, seed);
            let r = kmeans_pp(&data, &params).unwrap();
            for w in r.inertia_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", r.inertia_history);
            }
            let again = kmeans_pp(&data, &params).unwrap();
            prop_assert_eq!(r, again);
            let mut idx = kmeanspp_indices(&data, k, seed).unwrap();
            idx.sort_unstable();
            idx.dedup();
            prop_assert_eq!(idx.len(), k);
        }
    }
}
