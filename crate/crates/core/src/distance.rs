//! Squared Euclidean distance kernels.
//!
//! All kernels use the same fixed summation order: coordinate `j` is
//! accumulated into lane `j % 8` in increasing `j`, and the eight lanes are
//! combined with a fixed pairwise tree. The result is therefore identical
//! across calls, thread counts and target features, and the lane layout
//! lets the compiler vectorize the loop without reassociating floats.

const LANES: usize = 8;

/// Coordinates processed between two early-exit checks.
const CHECK_EVERY: usize = 8 * LANES;

#[inline(always)]
fn accumulate(acc: &mut [f64; LANES], a: &[f64], b: &[f64]) {
    for (ca, cb) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        for k in 0..LANES {
            let d = ca[k] - cb[k];
            acc[k] += d * d;
        }
    }
}

#[inline(always)]
fn accumulate_tail(acc: &mut [f64; LANES], a: &[f64], b: &[f64]) {
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        let d = x - y;
        acc[k] += d * d;
    }
}

#[inline(always)]
fn reduce(acc: &[f64; LANES]) -> f64 {
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]))
}

/// `||a - b||^2`. Panics in debug builds if the lengths differ.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let split = a.len() - a.len() % LANES;
    let mut acc = [0.0; LANES];
    accumulate(&mut acc, &a[..split], &b[..split]);
    accumulate_tail(&mut acc, &a[split..], &b[split..]);
    reduce(&acc)
}

/// `||a - b||^2`, or `None` as soon as a partial sum makes `beyond` true.
///
/// Partial sums never exceed the full sum, so `beyond` must be monotone:
/// if it holds for a partial sum it must also hold for the full one. When
/// `Some(d)` is returned, `d` equals [`squared_distance`] bit for bit.
#[inline]
pub fn squared_distance_within(
    a: &[f64],
    b: &[f64],
    beyond: impl Fn(f64) -> bool,
) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let split = a.len() - a.len() % LANES;
    let mut acc = [0.0; LANES];
    let (head_a, tail_a) = a.split_at(split);
    let (head_b, tail_b) = b.split_at(split);
    for (ca, cb) in head_a.chunks(CHECK_EVERY).zip(head_b.chunks(CHECK_EVERY)) {
        accumulate(&mut acc, ca, cb);
        if beyond(reduce(&acc)) {
            return None;
        }
    }
    accumulate_tail(&mut acc, tail_a, tail_b);
    let d = reduce(&acc);
    (!beyond(d)).then_some(d)
}
