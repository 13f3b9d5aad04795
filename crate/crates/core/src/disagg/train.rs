use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::ApplianceModel;
use crate::error::{Error, Result};
use crate::series::PowerSeries;

const MAX_ITERATIONS: usize = 100;
const CONVERGENCE_WATTS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Total number of states including OFF.
    pub num_states: usize,
    /// Samples at or below this level are treated as OFF and not clustered.
    pub on_threshold: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_states: 2,
            on_threshold: 10.0,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainingWarning {
    /// Fewer distinct ON levels than requested; the distinct values were used.
    DegenerateTraining { requested: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub model: ApplianceModel,
    pub warning: Option<TrainingWarning>,
}

/// Learns a state model from a sub-metered series.
///
/// State 0 is pinned at 0 W. The other `num_states - 1` levels are 1-D
/// k-means centroids of the samples above `on_threshold`.
pub fn train_states(name: &str, submetered: &PowerSeries, config: &TrainConfig) -> Result<Trained> {
    if config.num_states < 2 {
        return Err(Error::InvalidParameter(format!(
            "num_states must be at least 2, got {}",
            config.num_states
        )));
    }
    if !(config.on_threshold >= 0.0) {
        return Err(Error::InvalidParameter("on_threshold must be ≥ 0".into()));
    }
    if submetered.is_empty() {
        return Err(Error::EmptyInput);
    }
    let on: Vec<f64> = submetered
        .values()
        .iter()
        .flatten()
        .copied()
        .filter(|&v| v > config.on_threshold)
        .collect();
    if on.is_empty() {
        return Err(Error::NoOnState(config.on_threshold));
    }

    let k = config.num_states - 1;
    let mut distinct = on.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();

    let (levels, warning) = if distinct.len() < k {
        let found = distinct.len();
        (
            distinct,
            Some(TrainingWarning::DegenerateTraining { requested: k, found }),
        )
    } else {
        (kmeans_1d(&on, k, config.seed), None)
    };

    let mut states = Vec::with_capacity(levels.len() + 1);
    states.push(0.0);
    states.extend(levels);
    Ok(Trained {
        model: ApplianceModel::new(name, states)?,
        warning,
    })
}

/// Lloyd's algorithm on scalars with k-means++ seeding.
///
/// Returns `k` centroids in ascending order. Stops after 100 iterations or
/// once no centroid moves by 0.1 or more. Requires at least `k` distinct
/// values.
pub fn kmeans_1d(values: &[f64], k: usize, seed: u64) -> Vec<f64> {
    assert!(k >= 1 && values.len() >= k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centroids = Vec::with_capacity(k);
    centroids.push(values[rng.random_range(0..values.len())]);
    let mut d2: Vec<f64> = values.iter().map(|v| (v - centroids[0]).powi(2)).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = values.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..values.len())
        };
        let c = values[pick];
        centroids.push(c);
        for (d, v) in d2.iter_mut().zip(values) {
            *d = d.min((v - c).powi(2));
        }
    }
    centroids.sort_by(f64::total_cmp);

    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for _ in 0..MAX_ITERATIONS {
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for &v in values {
            let j = nearest(&centroids, v);
            sums[j] += v;
            counts[j] += 1;
        }
        let mut moved: f64 = 0.0;
        for j in 0..k {
            if counts[j] > 0 {
                let c = sums[j] / counts[j] as f64;
                moved = moved.max((c - centroids[j]).abs());
                centroids[j] = c;
            }
        }
        centroids.sort_by(f64::total_cmp);
        if moved < CONVERGENCE_WATTS {
            break;
        }
    }
    centroids
}

/// Index of the centroid closest to `v`; `sorted` must be ascending.
fn nearest(sorted: &[f64], v: f64) -> usize {
    let i = sorted.partition_point(|&c| c < v);
    if i == 0 {
        0
    } else if i == sorted.len() {
        sorted.len() - 1
    } else if v - sorted[i - 1] <= sorted[i] - v {
        i - 1
    } else {
        i
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: Vec<f64>) -> PowerSeries {
        PowerSeries::from_watts(0, 30, v).unwrap()
    }

    #[test]
    fn single_cluster() {
        let mut v = vec![0.0; 50];
        v.extend(vec![1000.0; 50]);
        let t = train_states("a", &series(v), &TrainConfig::default()).unwrap();
        assert_eq!(t.model.states(), &[0.0, 1000.0]);
        assert!(t.warning.is_none());
    }

    #[test]
    fn two_separated_clusters() {
        let mut v = vec![0.0];
        v.extend(vec![500.0; 30]);
        v.extend(vec![1500.0; 30]);
        let cfg = TrainConfig {
            num_states: 3,
            ..TrainConfig::default()
        };
        let t = train_states("a", &series(v), &cfg).unwrap();
        assert_eq!(t.model.states(), &[0.0, 500.0, 1500.0]);
    }

    #[test]
    fn all_zero_has_no_on_state() {
        let r = train_states("a", &series(vec![0.0; 20]), &TrainConfig::default());
        assert!(matches!(r, Err(Error::NoOnState(_))));
    }

    #[test]
    fn too_few_distinct_levels_warns() {
        let cfg = TrainConfig {
            num_states: 4,
            ..TrainConfig::default()
        };
        let t = train_states("a", &series(vec![0.0, 200.0, 200.0, 700.0]), &cfg).unwrap();
        assert_eq!(t.model.states(), &[0.0, 200.0, 700.0]);
        assert_eq!(
            t.warning,
            Some(TrainingWarning::DegenerateTraining { requested: 3, found: 2 })
        );
    }

    #[test]
    fn kmeans_is_deterministic_and_sorted() {
        let v: Vec<f64> = (0..300).map(|i| ((i * 37) % 101) as f64 * 10.0).collect();
        let a = kmeans_1d(&v, 4, 7);
        assert_eq!(a, kmeans_1d(&v, 4, 7));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nearest_ties_go_low() {
        assert_eq!(nearest(&[0.0, 10.0], 5.0), 0);
        assert_eq!(nearest(&[0.0, 10.0], 5.1), 1);
        assert_eq!(nearest(&[0.0, 10.0], -3.0), 0);
        assert_eq!(nearest(&[0.0, 10.0], 30.0), 1);
    }
}
