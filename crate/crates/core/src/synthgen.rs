//! Synthetic data from the Gaussian mixture model with outliers.
//!
//! Centers `mu_1..mu_m` and outliers are drawn from `N(0, I_p)`; an
//! observation with label `k > 0` is drawn from `N(mu_k, sigma_k^2 I_p)`.
//! Labels are i.i.d. categorical with probabilities
//! `(w_{-1}, w_1, ..., w_m)`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DataMatrix, LabelVector, OUTLIER};
use crate::rng::{rng_from_seed, Rng};

/// Parameters of the generative model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmConfig {
    /// Number of positive clusters.
    pub m: usize,
    /// Dimension.
    pub p: usize,
    /// Number of observations `N`.
    pub n_samples: usize,
    /// Outlier weight `w_{-1}`.
    pub outlier_weight: f64,
    pub cluster_weights: Vec<f64>,
    pub cluster_sigmas: Vec<f64>,
    pub seed: u64,
}

impl GmmConfig {
    /// Weights and sigmas from [`paper_weight_schedule`] and [`paper_sigma_schedule`].
    pub fn with_schedules(m: usize, p: usize, n_samples: usize, outlier_weight: f64, seed: u64) -> Self {
        Self {
            m,
            p,
            n_samples,
            outlier_weight,
            cluster_weights: paper_weight_schedule(m, outlier_weight),
            cluster_sigmas: paper_sigma_schedule(m),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if self.p == 0 || self.n_samples == 0 {
            return Err(Error::invalid("p and n_samples must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.outlier_weight) {
            return Err(Error::invalid(format!(
                "outlier_weight must lie in [0, 1), got {}",
                self.outlier_weight
            )));
        }
        if self.cluster_weights.len() != self.m || self.cluster_sigmas.len() != self.m {
            return Err(Error::invalid(format!(
                "expected {} cluster weights and sigmas, got {} and {}",
                self.m,
                self.cluster_weights.len(),
                self.cluster_sigmas.len()
            )));
        }
        if self.cluster_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("cluster weights must be non-negative"));
        }
        let total = self.outlier_weight + self.cluster_weights.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
        }
        if let Some(s) = self.cluster_sigmas.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return Err(Error::invalid(format!("cluster sigma {s} outside (0, 1)")));
        }
        Ok(())
    }

    pub fn sigma_max(&self) -> f64 {
        self.cluster_sigmas.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_cluster_weight(&self) -> f64 {
        self.cluster_weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A sampled dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub true_labels: LabelVector,
    pub true_centers: Vec<Vec<f64>>,
    pub config: GmmConfig,
}

/// Cluster weights rising linearly from `0.8/m` to `1.2/m`, scaled to
/// leave `outlier_weight` for the outliers.
pub fn paper_weight_schedule(m: usize, outlier_weight: f64) -> Vec<f64> {
    let mass = 1.0 - outlier_weight;
    if m == 1 {
        return vec![mass];
    }
    let mf = m as f64;
    let (lo, hi) = (0.8 / mf, 1.2 / mf);
    (0..m)
        .map(|i| mass * (lo + (hi - lo) * i as f64 / (mf - 1.0)))
        .collect()
}

/// Cluster standard deviations rising linearly from 1/16 to 1/4.
/// A single cluster gets 1/4.
pub fn paper_sigma_schedule(m: usize) -> Vec<f64> {
    const LO: f64 = 1.0 / 16.0;
    const HI: f64 = 0.25;
    if m == 1 {
        return vec![HI];
    }
    (0..m)
        .map(|i| LO + (HI - LO) * i as f64 / (m - 1) as f64)
        .collect()
}

fn fill_normal(rng: &mut Rng, mean: Option<&[f64]>, sigma: f64, out: &mut Vec<f64>, p: usize) {
    match mean {
        Some(mu) => out.extend(mu.iter().map(|&c| {
            let z: f64 = StandardNormal.sample(rng);
            c + sigma * z
        })),
        None => out.extend((0..p).map(|_| -> f64 { StandardNormal.sample(rng) })),
    }
}

/// Draws a dataset from `config`. Identical configs give bit-identical output.
pub fn sample(config: &GmmConfig) -> Result<LabeledDataset> {
    config.validate()?;
    let GmmConfig { m, p, n_samples, .. } = *config;
    let mut rng = rng_from_seed(config.seed);

    let mut centers = Vec::with_capacity(m);
    for _ in 0..m {
        let mut c = Vec::with_capacity(p);
        fill_normal(&mut rng, None, 1.0, &mut c, p);
        centers.push(c);
    }

    // Category 0 is the outlier component, category k the k-th cluster.
    let weights: Vec<f64> = std::iter::once(config.outlier_weight)
        .chain(config.cluster_weights.iter().copied())
        .collect();
    let categories =
        WeightedIndex::new(&weights).map_err(|e| Error::invalid(format!("bad weights: {e}")))?;

    let mut values = Vec::with_capacity(n_samples * p);
    let mut labels = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        match categories.sample(&mut rng) {
            0 => {
                labels.push(OUTLIER);
                fill_normal(&mut rng, None, 1.0, &mut values, p);
            }
            k => {
                labels.push(k as i32);
                fill_normal(&mut rng, Some(&centers[k - 1]), config.cluster_sigmas[k - 1], &mut values, p);
            }
        }
    }

    Ok(LabeledDataset {
        data: DataMatrix::new(n_samples, p, values)?,
        true_labels: LabelVector::new(labels)?,
        true_centers: centers,
        config: config.clone(),
    })
}

/// Empirical violation rates of the four pairwise distance bounds that
/// drive the accuracy guarantee, each estimated from independent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairBoundRates {
    /// Same cluster `j`: `||x_i - x_k||^2 >= 2.5 p sigma_j^2`.
    pub same_cluster_spread: f64,
    /// Two outliers: `||x_i - x_k||^2 <= 1.5 p`.
    pub outlier_outlier: f64,
    /// Outlier vs cluster `j`: `||x_i - x_k||^2 <= p (1.5 + 0.75 sigma_j^2)`.
    pub cluster_outlier: f64,
    /// Clusters `i != j`: `||x_i - x_k||^2 <= p (1.5 + 0.75 sigma_i^2 + 0.75 sigma_j^2)`.
    pub cross_cluster: f64,
    pub pairs: usize,
    /// The probability bound `2 exp(-p / 128)` each rate should respect.
    pub bound: f64,
}

/// Estimates [`PairBoundRates`] in dimension `p`. Pair `t` uses cluster
/// `t mod m` (and `t + 1 mod m` for cross-cluster pairs) with fresh centers
/// drawn from `N(0, I_p)` for every pair.
pub fn pair_bound_rates(p: usize, sigmas: &[f64], pairs: usize, seed: u64) -> Result<PairBoundRates> {
    if p == 0 || pairs == 0 || sigmas.len() < 2 {
        return Err(Error::invalid(
            "need p >= 1, pairs >= 1 and at least two cluster sigmas",
        ));
    }
    let pf = p as f64;
    let mut rng = rng_from_seed(seed);
    let mut mu_a = Vec::with_capacity(p);
    let mut mu_b = Vec::with_capacity(p);
    let mut xa = Vec::with_capacity(p);
    let mut xb = Vec::with_capacity(p);
    let fresh = |rng: &mut Rng, buf: &mut Vec<f64>, mean: Option<&[f64]>, s: f64| {
        buf.clear();
        fill_normal(rng, mean, s, buf, p);
    };
    let d2 = crate::distance::squared_distance;

    let mut counts = [0usize; 4];
    for t in 0..pairs {
        let j = t % sigmas.len();
        let i = (t + 1) % sigmas.len();
        let (sj, si) = (sigmas[j], sigmas[i]);

        fresh(&mut rng, &mut mu_a, None, 1.0);
        fresh(&mut rng, &mut xa, Some(&mu_a), sj);
        fresh(&mut rng, &mut xb, Some(&mu_a), sj);
        counts[0] += (d2(&xa, &xb) >= 2.5 * pf * sj * sj) as usize;

        fresh(&mut rng, &mut xa, None, 1.0);
        fresh(&mut rng, &mut xb, None, 1.0);
        counts[1] += (d2(&xa, &xb) <= 1.5 * pf) as usize;

        fresh(&mut rng, &mut mu_a, None, 1.0);
        fresh(&mut rng, &mut xa, None, 1.0);
        fresh(&mut rng, &mut xb, Some(&mu_a), sj);
        counts[2] += (d2(&xa, &xb) <= pf * (1.5 + 0.75 * sj * sj)) as usize;

        fresh(&mut rng, &mut mu_a, None, 1.0);
        fresh(&mut rng, &mut mu_b, None, 1.0);
        fresh(&mut rng, &mut xa, Some(&mu_a), si);
        fresh(&mut rng, &mut xb, Some(&mu_b), sj);
        counts[3] += (d2(&xa, &xb) <= pf * (1.5 + 0.75 * si * si + 0.75 * sj * sj)) as usize;
    }
    let rate = |c: usize| c as f64 / pairs as f64;
    Ok(PairBoundRates {
        same_cluster_spread: rate(counts[0]),
        outlier_outlier: rate(counts[1]),
        cluster_outlier: rate(counts[2]),
        cross_cluster: rate(counts[3]),
        pairs,
        bound: 2.0 * (-pf / 128.0).exp(),
    })
}
