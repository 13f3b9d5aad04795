use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::spec::{BuildingSpec, LoadKind, LoadSpec, Schedule};
use crate::calendar::{hour_of_day, second_of_week};
use crate::error::{Error, Result};
use crate::hierarchy::{Level, MeterHierarchy, MeterNode};
use crate::seed::derive_seed;
use crate::series::PowerSeries;

/// The sampling grid a load is generated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clock {
    pub start: i64,
    pub period: i64,
    pub len: usize,
    pub utc_offset: i64,
}

impl Clock {
    pub fn timestamp(&self, i: usize) -> i64 {
        self.start + i as i64 * self.period
    }

    /// Whether `schedule` is ON at sample `i`.
    pub fn scheduled(&self, schedule: &Schedule, i: usize) -> bool {
        schedule.is_on(second_of_week(self.timestamp(i), self.utc_offset))
    }

    pub fn local_hour(&self, i: usize) -> usize {
        hour_of_day(self.timestamp(i), self.utc_offset)
    }
}

struct Noise {
    dist: Option<Normal<f64>>,
}

impl Noise {
    fn new(sigma: f64) -> Result<Self> {
        let dist = if sigma > 0.0 {
            Some(Normal::new(0.0, sigma).map_err(|e| Error::InvalidSpec(e.to_string()))?)
        } else {
            None
        };
        Ok(Self { dist })
    }

    /// Adds noise to a positive reading, clamped at 0.
    fn apply(&self, v: f64, rng: &mut impl Rng) -> f64 {
        match &self.dist {
            Some(d) => (v + d.sample(rng)).max(0.0),
            None => v,
        }
    }
}

/// On/off load: `on_power` plus noise while scheduled, otherwise exactly 0.
pub fn gen_two_state(
    on_power: f64,
    schedule: &Schedule,
    noise_sigma: f64,
    clock: &Clock,
    rng: &mut impl Rng,
) -> Result<PowerSeries> {
    if !(on_power.is_finite() && on_power > 0.0) {
        return Err(Error::InvalidSpec("on_power must be positive".into()));
    }
    let noise = Noise::new(noise_sigma)?;
    let v = (0..clock.len)
        .map(|i| {
            if clock.scheduled(schedule, i) {
                noise.apply(on_power, rng)
            } else {
                0.0
            }
        })
        .collect();
    PowerSeries::from_watts(clock.start, clock.period, v)
}

/// Folds `v` into `[lo, hi]` by repeated reflection at the edges.
fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    let x = (v - lo).rem_euclid(2.0 * w);
    lo + if x > w { 2.0 * w - x } else { x }
}

/// Variable-frequency drive: while scheduled, a random walk with Gaussian
/// steps of `drift_sigma` reflected into `[min_power, max_power]`, restarted
/// at `start_power` at the beginning of every ON period.
#[allow(clippy::too_many_arguments)]
pub fn gen_vfd(
    min_power: f64,
    max_power: f64,
    drift_sigma: f64,
    start_power: Option<f64>,
    schedule: &Schedule,
    noise_sigma: f64,
    clock: &Clock,
    rng: &mut impl Rng,
) -> Result<PowerSeries> {
    if !(0.0 < min_power && min_power < max_power && max_power.is_finite()) {
        return Err(Error::InvalidSpec("need 0 < min_power < max_power".into()));
    }
    let start = start_power.unwrap_or((min_power + max_power) / 2.0);
    let step = Noise::new(drift_sigma)?;
    let noise = Noise::new(noise_sigma)?;
    let mut level = start;
    let mut was_on = false;
    let v = (0..clock.len)
        .map(|i| {
            if !clock.scheduled(schedule, i) {
                was_on = false;
                return 0.0;
            }
            level = if was_on {
                match &step.dist {
                    Some(d) => reflect(level + d.sample(rng), min_power, max_power),
                    None => level,
                }
            } else {
                start
            };
            was_on = true;
            noise.apply(level, rng)
        })
        .collect();
    PowerSeries::from_watts(clock.start, clock.period, v)
}

/// Elevator: constant `base_power` with rectangular trips whose start
/// probability per sample follows the hourly rate profile.
pub fn gen_elevator(
    base_power: f64,
    trip_power: [f64; 2],
    trip_duration_secs: [f64; 2],
    trips_per_hour: &[f64],
    noise_sigma: f64,
    clock: &Clock,
    rng: &mut impl Rng,
) -> Result<PowerSeries> {
    if trips_per_hour.len() != 24 {
        return Err(Error::InvalidSpec("trips_per_hour needs 24 entries".into()));
    }
    let noise = Noise::new(noise_sigma)?;
    let mut remaining = 0usize;
    let mut extra = 0.0;
    let v = (0..clock.len)
        .map(|i| {
            if remaining == 0 {
                let p = trips_per_hour[clock.local_hour(i)] * clock.period as f64 / 3_600.0;
                if p > 0.0 && rng.random::<f64>() < p {
                    extra = rng.random_range(trip_power[0]..=trip_power[1]);
                    let d = rng.random_range(trip_duration_secs[0]..=trip_duration_secs[1]);
                    remaining = ((d / clock.period as f64).round() as usize).max(1);
                }
            }
            let w = if remaining > 0 {
                remaining -= 1;
                base_power + extra
            } else {
                base_power
            };
            if w > 0.0 {
                noise.apply(w, rng)
            } else {
                0.0
            }
        })
        .collect();
    PowerSeries::from_watts(clock.start, clock.period, v)
}

/// Multi-state load: while scheduled, holds one of `levels` and jumps to a
/// uniformly chosen level with probability `period / mean_dwell_secs` per step.
pub fn gen_multi_state(
    levels: &[f64],
    mean_dwell_secs: f64,
    schedule: &Schedule,
    noise_sigma: f64,
    clock: &Clock,
    rng: &mut impl Rng,
) -> Result<PowerSeries> {
    if levels.is_empty() {
        return Err(Error::InvalidSpec("no levels".into()));
    }
    let noise = Noise::new(noise_sigma)?;
    let switch_p = (clock.period as f64 / mean_dwell_secs).min(1.0);
    let mut current: Option<usize> = None;
    let v = (0..clock.len)
        .map(|i| {
            if !clock.scheduled(schedule, i) {
                current = None;
                return 0.0;
            }
            let idx = match current {
                Some(c) if rng.random::<f64>() >= switch_p => c,
                _ => rng.random_range(0..levels.len()),
            };
            current = Some(idx);
            noise.apply(levels[idx], rng)
        })
        .collect();
    PowerSeries::from_watts(clock.start, clock.period, v)
}

/// Generates one load on `clock` following `schedule` (which may differ from
/// the load's own schedule when it belongs to a sync group).
pub fn generate_load(load: &LoadSpec, schedule: &Schedule, clock: &Clock, seed: u64) -> Result<PowerSeries> {
    load.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = load.noise_sigma;
    match &load.kind {
        LoadKind::TwoState { on_power } => gen_two_state(*on_power, schedule, sigma, clock, &mut rng),
        LoadKind::MultiState {
            levels,
            mean_dwell_secs,
        } => gen_multi_state(levels, *mean_dwell_secs, schedule, sigma, clock, &mut rng),
        LoadKind::Vfd {
            min_power,
            max_power,
            drift_sigma,
            start_power,
        } => gen_vfd(
            *min_power,
            *max_power,
            *drift_sigma,
            *start_power,
            schedule,
            sigma,
            clock,
            &mut rng,
        ),
        LoadKind::Elevator {
            base_power,
            trip_power,
            trip_duration_secs,
            trips_per_hour,
        } => gen_elevator(
            *base_power,
            *trip_power,
            *trip_duration_secs,
            trips_per_hour,
            sigma,
            clock,
            &mut rng,
        ),
    }
}

fn sum_in_order(parts: &[&PowerSeries]) -> Result<PowerSeries> {
    let first = parts[0];
    let mut acc = vec![0.0; first.len()];
    for p in parts {
        for (a, v) in acc.iter_mut().zip(p.values()) {
            *a += v.unwrap_or(0.0);
        }
    }
    PowerSeries::from_watts(first.start(), first.period(), acc)
}

/// Generates every load and assembles the building → floor → load tree.
///
/// Floor series are the exact sum of their loads and the building series the
/// exact sum of its floors, accumulated in listed order. Each load draws from
/// its own RNG stream seeded by `(spec.seed, load id)`.
pub fn simulate_building(spec: &BuildingSpec) -> Result<MeterHierarchy> {
    spec.validate()?;
    let clock = Clock {
        start: spec.start_time,
        period: spec.period,
        len: spec.num_samples(),
        utc_offset: spec.utc_offset,
    };
    let loads: Vec<&LoadSpec> = spec.loads().collect();
    let generated: Vec<PowerSeries> = loads
        .par_iter()
        .map(|l| {
            generate_load(
                l,
                spec.effective_schedule(l),
                &clock,
                derive_seed(spec.seed, &l.id),
            )
        })
        .collect::<Result<_>>()?;

    let mut nodes = Vec::new();
    let mut floor_series = Vec::new();
    let mut next = 0;
    for f in &spec.floors {
        let own = &generated[next..next + f.loads.len()];
        next += f.loads.len();
        let parts: Vec<&PowerSeries> = own.iter().collect();
        let total = sum_in_order(&parts)?;
        for (l, s) in f.loads.iter().zip(own) {
            nodes.push(MeterNode::new(&l.id, Level::Load).with_series(s.clone()));
        }
        nodes.push(
            MeterNode::new(&f.id, Level::Floor)
                .with_series(total.clone())
                .with_children(f.loads.iter().map(|l| l.id.clone())),
        );
        floor_series.push(total);
    }
    let parts: Vec<&PowerSeries> = floor_series.iter().collect();
    nodes.push(
        MeterNode::new(&spec.id, Level::Building)
            .with_series(sum_in_order(&parts)?)
            .with_children(spec.floors.iter().map(|f| f.id.clone())),
    );
    MeterHierarchy::new(nodes)
}
