//! Kozachenko–Leonenko nearest-neighbour differential entropy in one
//! dimension.
//!
//! In nats the estimate is `ψ(n) − ψ(k) + ln 2 + (1/n) Σ ln dᵢ`, where `dᵢ`
//! is the distance from sample `i` to its k-th nearest neighbour; the result
//! is reported in bits. Samples are first jittered by uniform noise of
//! amplitude `1e-10 · max(1, max|x|)` so repeated readings do not produce
//! zero distances.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::digamma;

use crate::error::{Error, Result};
use crate::series::PowerSeries;

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_JITTER_SEED: u64 = 0x6b6e6e;

const JITTER: f64 = 1e-10;

/// Entropy estimate in bits for the present samples of `series`.
pub fn knn_entropy(series: &PowerSeries, k: usize) -> Result<f64> {
    knn_entropy_seeded(series, k, DEFAULT_JITTER_SEED)
}

pub fn knn_entropy_seeded(series: &PowerSeries, k: usize, seed: u64) -> Result<f64> {
    let values: Vec<f64> = series.values().iter().flatten().copied().collect();
    knn_entropy_of(&values, k, seed)
}

/// Entropy estimate in bits for raw scalar samples.
pub fn knn_entropy_of(samples: &[f64], k: usize, seed: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = samples.len();
    if n < k + 1 {
        return Err(Error::TooShort { needed: k + 1, got: n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite sample".into()));
    }
    let scale = samples.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let amplitude = JITTER * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = samples
        .iter()
        .map(|v| v + amplitude * rng.random::<f64>())
        .collect();
    xs.sort_by(f64::total_cmp);

    // Ties that survive jitter (rounding at large magnitudes) are floored at
    // one ulp of the data scale.
    let floor = f64::EPSILON * scale;
    let mean_log: f64 = (0..n)
        .map(|i| kth_neighbor_distance(&xs, i, k).max(floor).ln())
        .sum::<f64>()
        / n as f64;
    let nats = digamma(n as f64) - digamma(k as f64) + LN_2 + mean_log;
    Ok(nats / LN_2)
}

/// Distance from `sorted[i]` to its k-th nearest other sample.
fn kth_neighbor_distance(sorted: &[f64], i: usize, k: usize) -> f64 {
    let x = sorted[i];
    let (mut lo, mut hi) = (i, i + 1);
    let mut d = 0.0;
    for _ in 0..k {
        let left = (lo > 0).then(|| x - sorted[lo - 1]);
        let right = (hi < sorted.len()).then(|| sorted[hi] - x);
        d = match (left, right) {
            (Some(l), Some(r)) if l <= r => {
                lo -= 1;
                l
            }
            (_, Some(r)) => {
                hi += 1;
                r
            }
            (Some(l), None) => {
                lo -= 1;
                l
            }
            (None, None) => unreachable!("n > k guarantees a neighbour"),
        };
    }
    d
}
