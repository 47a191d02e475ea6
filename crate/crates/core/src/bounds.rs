//! Probability lower bound for perfect recovery and the minimum-parameter
//! thresholds that make it at least `1 - delta`. All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four subtracted terms of the probability lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Terms {
    /// `10 N^2 exp(-p/128)`: pairwise concentration and separation failures.
    pub pairwise: f64,
    /// `m exp(-n a / m)`: some cluster missing from the subsample.
    pub subsample_coverage: f64,
    /// `2 m exp(-p/128)`: cross-cluster separation failures.
    pub cluster_separation: f64,
    /// `m exp(-a (N - 1) / m)`: some cluster with no other member.
    pub sample_coverage: f64,
}

impl Theorem1Terms {
    pub fn sum(&self) -> f64 {
        self.pairwise + self.subsample_coverage + self.cluster_separation + self.sample_coverage
    }
}

pub fn theorem1_terms(n_total: usize, p: usize, m: usize, n: usize, a: f64) -> Theorem1Terms {
    let (nt, p, m, n) = (n_total as f64, p as f64, m as f64, n as f64);
    let tail = (-p / 128.0).exp();
    Theorem1Terms {
        pairwise: 10.0 * nt * nt * tail,
        subsample_coverage: m * (-n * a / m).exp(),
        cluster_separation: 2.0 * m * tail,
        sample_coverage: m * (-a * (nt - 1.0) / m).exp(),
    }
}

/// `1 - 10N^2 e^{-p/128} - m e^{-na/m} - 2m e^{-p/128} - m e^{-a(N-1)/m}`.
/// Can be negative, in which case the bound is vacuous.
pub fn theorem1_probability(n_total: usize, p: usize, m: usize, n: usize, a: f64) -> f64 {
    let t = theorem1_terms(n_total, p, m, n, a);
    1.0 - t.pairwise - t.subsample_coverage - t.cluster_separation - t.sample_coverage
}

/// Smallest integer strictly greater than `x` (`x >= 0`).
fn strict_ceiling(x: f64) -> usize {
    x.floor() as usize + 1
}

/// Minimum parameters for which recovery holds with probability `1 - delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub p_min_vs_n_total: usize,
    pub p_min_vs_m: usize,
    pub n_min: usize,
    pub n_total_min: usize,
}

impl Thresholds {
    pub fn p_min(&self) -> usize {
        self.p_min_vs_n_total.max(self.p_min_vs_m)
    }
}

fn check_inputs(n_total: usize, m: usize, a: f64, delta: f64) -> Result<()> {
    if n_total == 0 || m == 0 {
        return Err(Error::invalid("N and m must be at least 1"));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::invalid(format!("a must be positive, got {a}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Coverage right-hand side `(m/a)(ln m + ln(4/delta))`.
fn coverage_rhs(m: usize, a: f64, delta: f64) -> f64 {
    let m = m as f64;
    m / a * (m.ln() + (4.0 / delta).ln())
}

/// Smallest integers strictly satisfying
/// `p > 128(2 ln N + ln(40/delta))`, `p > 128(ln m + ln(8/delta))`,
/// `n > (m/a)(ln m + ln(4/delta))` and `N > (m/a)(ln m + ln(4/delta)) + 1`.
pub fn corollary7_thresholds(n_total: usize, m: usize, a: f64, delta: f64) -> Result<Thresholds> {
    check_inputs(n_total, m, a, delta)?;
    let cov = coverage_rhs(m, a, delta);
    Ok(Thresholds {
        p_min_vs_n_total: strict_ceiling(128.0 * (2.0 * (n_total as f64).ln() + (40.0 / delta).ln())),
        p_min_vs_m: strict_ceiling(128.0 * ((m as f64).ln() + (8.0 / delta).ln())),
        n_min: strict_ceiling(cov),
        n_total_min: strict_ceiling(cov + 1.0),
    })
}

/// Whether `(N, p, m, n)` satisfies all four strict conditions.
pub fn corollary7_satisfied(n_total: usize, p: usize, m: usize, n: usize, a: f64, delta: f64) -> Result<bool> {
    let t = corollary7_thresholds(n_total, m, a, delta)?;
    Ok(p >= t.p_min() && n >= t.n_min && n_total >= t.n_total_min)
}

/// `sigma_max <= rho < sqrt(0.6)`.
pub fn assumption1_holds(sigma_max: f64, rho: f64) -> bool {
    sigma_max <= rho && rho < 0.6f64.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n_total: usize,
    pub p: usize,
    pub m: usize,
    pub n: usize,
    pub a: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub prob_lower_bound: f64,
    pub terms: Theorem1Terms,
    pub thresholds: Thresholds,
    pub satisfied: bool,
    pub inputs: BoundInputs,
}

pub fn bound_report(inputs: BoundInputs) -> Result<BoundReport> {
    let BoundInputs { n_total, p, m, n, a, delta } = inputs;
    check_inputs(n_total, m, a, delta)?;
    if p == 0 || n == 0 {
        return Err(Error::invalid("p and n must be at least 1"));
    }
    Ok(BoundReport {
        prob_lower_bound: theorem1_probability(n_total, p, m, n, a),
        terms: theorem1_terms(n_total, p, m, n, a),
        thresholds: corollary7_thresholds(n_total, m, a, delta)?,
        satisfied: corollary7_satisfied(n_total, p, m, n, a, delta)?,
        inputs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_examples() {
        let t = corollary7_thresholds(20000, 3, 0.8, 0.01).unwrap();
        // 128 (2 ln 20000 + ln 4000) = 3596.93...
        assert_eq!(t.p_min_vs_n_total, 3597);
        assert_eq!(t.n_min, 27);
        assert_eq!(t.n_total_min, 28);
        assert_eq!(t.p_min_vs_m, 997);
        let one = corollary7_thresholds(10, 1, 1.0, 1.0 - 1e-12).unwrap();
        assert_eq!(one.n_min, 2);
    }

    #[test]
    fn probability_examples() {
        let v = theorem1_probability(20000, 3700, 3, 27, 0.8);
        assert!((v - 0.996_642_774_500_223_5).abs() < 1e-12);
        assert!(theorem1_probability(2, 1, 1, 1, 1.0) < -41.0);
        assert!((theorem1_probability(10, 1 << 20, 1, 1 << 20, 1.0) - (1.0 - (-9.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn assumption1_examples() {
        assert!(assumption1_holds(0.25, 0.5));
        assert!(assumption1_holds(0.25, 0.25));
        assert!(!assumption1_holds(0.25, 0.6f64.sqrt()));
        assert!(!assumption1_holds(0.3, 0.25));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(corollary7_thresholds(0, 3, 0.8, 0.01).is_err());
        assert!(corollary7_thresholds(10, 3, 0.0, 0.01).is_err());
        assert!(corollary7_thresholds(10, 3, 0.8, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn thresholds_are_minimal_and_sufficient(n_total in 2usize..1_000_000, m in 1usize..100,
                                                 a in 0.05f64..1.0, delta in 0.001f64..0.5) {
            let t = corollary7_thresholds(n_total, m, a, delta).unwrap();
            let (nt, mf) = (n_total as f64, m as f64);
            let rhs_pn = 128.0 * (2.0 * nt.ln() + (40.0 / delta).ln());
            let rhs_pm = 128.0 * (mf.ln() + (8.0 / delta).ln());
            let rhs_n = mf / a * (mf.ln() + (4.0 / delta).ln());
            for (thr, rhs) in [(t.p_min_vs_n_total, rhs_pn), (t.p_min_vs_m, rhs_pm),
                               (t.n_min, rhs_n), (t.n_total_min, rhs_n + 1.0)] {
                prop_assert!(thr as f64 > rhs);
                prop_assert!(((thr - 1) as f64) <= rhs);
            }
            // Each term of the bound is below delta/4 at the thresholds.
            let terms = theorem1_terms(t.n_total_min.max(n_total), t.p_min(), m, t.n_min, a);
            let q = delta / 4.0 * (1.0 + 1e-12);
            let pair = theorem1_terms(n_total, t.p_min_vs_n_total, m, t.n_min, a).pairwise;
            prop_assert!(pair < q);
            prop_assert!(terms.subsample_coverage < q);
            prop_assert!(terms.cluster_separation < q);
            let sc = theorem1_terms(t.n_total_min, t.p_min(), m, t.n_min, a).sample_coverage;
            prop_assert!(sc < q);
        }

        #[test]
        fn probability_monotone(n_total in 1usize..100_000, p in 1usize..10_000, m in 1usize..50,
                                n in 1usize..1000, a in 0.01f64..1.0, dp in 0usize..500,
                                dn in 0usize..50, da in 0.0f64..1.0) {
            let base = theorem1_probability(n_total, p, m, n, a);
            prop_assert!(base <= 1.0);
            prop_assert!(theorem1_probability(n_total, p + dp, m, n, a) >= base);
            prop_assert!(theorem1_probability(n_total, p, m, n + dn, a) >= base);
            prop_assert!(theorem1_probability(n_total, p, m, n, a + da) >= base);
        }
    }
}
