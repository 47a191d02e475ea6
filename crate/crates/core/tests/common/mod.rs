//! Independent reference implementations for integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct OracleFit {
    pub centers: Vec<usize>,
    pub labels: Vec<i32>,
    pub stopped_early: bool,
}

fn d2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let t = a[k] - b[k];
        s += t * t;
    }
    s
}

/// Straight transcription of the extraction loop and labeling rule with
/// plain loops and no early exits. `subsample` must be ascending.
pub fn brute_force_fit(rows: &[Vec<f64>], rho: f64, f: f64, subsample: &[usize], t: usize) -> OracleFit {
    let p = rows[0].len() as f64;
    let scale = p * rho * rho;
    let thr = scale * f;
    let loss = |i: usize| -> f64 {
        let mut s = 0.0;
        for r in rows {
            s += (d2(&rows[i], r) / scale - f).min(0.0);
        }
        s
    };
    let losses: Vec<f64> = subsample.iter().map(|&i| loss(i)).collect();
    let mut alive: Vec<bool> = vec![true; subsample.len()];
    let mut centers = Vec::new();
    let mut stopped_early = true;
    for round in 0..t {
        let mut best: Option<usize> = None;
        for s in 0..subsample.len() {
            if alive[s] && best.is_none_or(|b| losses[s] < losses[b]) {
                best = Some(s);
            }
        }
        let Some(b) = best else { break };
        if losses[b] >= -f {
            break;
        }
        let c = subsample[b];
        centers.push(c);
        for s in 0..subsample.len() {
            if d2(&rows[subsample[s]], &rows[c]) < thr {
                alive[s] = false;
            }
        }
        if round == t - 1 {
            stopped_early = false;
        }
    }
    let labels = rows
        .iter()
        .map(|x| {
            let mut label = -1;
            let mut best = f64::INFINITY;
            for (j, &c) in centers.iter().enumerate() {
                let d = d2(x, &rows[c]);
                if d < thr && d < best {
                    best = d;
                    label = j as i32 + 1;
                }
            }
            label
        })
        .collect();
    OracleFit {
        centers,
        labels,
        stopped_early,
    }
}

/// Random dataset on a grid of quarter-integers, so squared distances are
/// exact in any summation order.
pub fn dyadic_dataset(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rng.random_range(1..=12);
    let p = rng.random_range(1..=4);
    let spread = rng.random_range(1..=24);
    // A few tight groups plus scattered points.
    let groups: Vec<Vec<i32>> = (0..rng.random_range(1..=3))
        .map(|_| (0..p).map(|_| rng.random_range(-spread..=spread)).collect())
        .collect();
    (0..n)
        .map(|_| {
            if rng.random_bool(0.7) {
                let g = &groups[rng.random_range(0..groups.len())];
                g.iter().map(|&c| (c + rng.random_range(-1..=1)) as f64 / 4.0).collect()
            } else {
                (0..p).map(|_| rng.random_range(-4 * spread..=4 * spread) as f64 / 4.0).collect()
            }
        })
        .collect()
}

pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Best total over all injective row-to-column maps of a square matrix.
pub fn exhaustive_assignment(m: &[Vec<f64>], maximize: bool) -> f64 {
    let k = m.len();
    let mut best = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    for perm in permutations(k) {
        let v: f64 = perm.iter().enumerate().map(|(i, &j)| m[i][j]).sum();
        best = if maximize { best.max(v) } else { best.min(v) };
    }
    best
}

/// Accuracy by enumerating every relabeling of predicted positive clusters.
pub fn brute_force_accuracy(truth: &[i32], pred: &[i32]) -> f64 {
    let mut pred_ids: Vec<i32> = pred.iter().copied().filter(|&l| l > 0).collect();
    pred_ids.sort_unstable();
    pred_ids.dedup();
    let mut true_ids: Vec<i32> = truth.iter().copied().filter(|&l| l > 0).collect();
    true_ids.sort_unstable();
    true_ids.dedup();
    // Pad targets with unused labels so every predicted cluster has an image.
    let mut targets = true_ids.clone();
    let mut extra = 1_000_000;
    while targets.len() < pred_ids.len() {
        targets.push(extra);
        extra += 1;
    }
    let mut best = 0usize;
    for perm in permutations(targets.len()) {
        let map = |l: i32| -> i32 {
            if l < 0 {
                return l;
            }
            let k = pred_ids.iter().position(|&x| x == l).unwrap();
            targets[perm[k]]
        };
        let hits = truth.iter().zip(pred).filter(|(&t, &p)| map(p) == t).count();
        best = best.max(hits);
    }
    best as f64 / truth.len() as f64
}
