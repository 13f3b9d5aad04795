use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::calendar::{SECS_PER_DAY, SECS_PER_HOUR, SECS_PER_WEEK};
use crate::error::{Error, Result};

/// A half-open span `[start, end)` in seconds since local Monday 00:00.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeeklyInterval {
    pub start: i64,
    pub end: i64,
}

/// Weekly ON intervals in local time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Schedule {
    intervals: Vec<WeeklyInterval>,
}

impl Schedule {
    pub fn new(mut intervals: Vec<WeeklyInterval>) -> Result<Self> {
        intervals.sort_by_key(|i| i.start);
        for iv in &intervals {
            if iv.start < 0 || iv.end > SECS_PER_WEEK || iv.start >= iv.end {
                return Err(Error::InvalidSpec(format!(
                    "schedule interval [{}, {}) outside the week",
                    iv.start, iv.end
                )));
            }
        }
        if intervals.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(Error::InvalidSpec("overlapping schedule intervals".into()));
        }
        Ok(Self { intervals })
    }

    pub fn never() -> Self {
        Self::default()
    }

    pub fn always() -> Self {
        Self {
            intervals: vec![WeeklyInterval {
                start: 0,
                end: SECS_PER_WEEK,
            }],
        }
    }

    /// The same local-time window on each of the given days (0 = Monday).
    /// Hours may be fractional.
    pub fn on_days(days: impl IntoIterator<Item = usize>, from_hour: f64, to_hour: f64) -> Self {
        let (a, b) = (
            (from_hour * SECS_PER_HOUR as f64).round() as i64,
            (to_hour * SECS_PER_HOUR as f64).round() as i64,
        );
        let intervals = days
            .into_iter()
            .map(|d| WeeklyInterval {
                start: d as i64 * SECS_PER_DAY + a,
                end: d as i64 * SECS_PER_DAY + b,
            })
            .collect();
        Self::new(intervals).expect("well-formed day window")
    }

    /// Monday to Friday, `[from_hour, to_hour)`.
    pub fn weekdays(from_hour: f64, to_hour: f64) -> Self {
        Self::on_days(0..5, from_hour, to_hour)
    }

    /// Every day of the week, `[from_hour, to_hour)`.
    pub fn daily(from_hour: f64, to_hour: f64) -> Self {
        Self::on_days(0..7, from_hour, to_hour)
    }

    pub fn intervals(&self) -> &[WeeklyInterval] {
        &self.intervals
    }

    pub fn is_on(&self, second_of_week: i64) -> bool {
        self.intervals
            .iter()
            .any(|iv| iv.start <= second_of_week && second_of_week < iv.end)
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.intervals.clone()).map(|_| ())
    }
}

/// Electrical behaviour of a simulated load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoadKind {
    /// Fixed draw while scheduled.
    TwoState { on_power: f64 },
    /// Cycles among discrete levels while scheduled, with exponential dwell.
    MultiState { levels: Vec<f64>, mean_dwell_secs: f64 },
    /// Reflected random walk inside `[min_power, max_power]` while scheduled;
    /// every ON period starts at `start_power` (band midpoint by default).
    Vfd {
        min_power: f64,
        max_power: f64,
        drift_sigma: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        start_power: Option<f64>,
    },
    /// Constant standby draw plus short rectangular trips. Ignores the
    /// schedule; trip arrivals follow `trips_per_hour` by local hour.
    Elevator {
        base_power: f64,
        trip_power: [f64; 2],
        trip_duration_secs: [f64; 2],
        trips_per_hour: Vec<f64>,
    },
}

impl LoadKind {
    /// Standby of 400 W; trips of 3–7 kW for 15–44 s, concentrated in
    /// working hours so that off-hours energy is about half the peak hour.
    pub fn default_elevator() -> Self {
        LoadKind::Elevator {
            base_power: 400.0,
            trip_power: [3_000.0, 7_000.0],
            trip_duration_secs: [15.0, 44.0],
            trips_per_hour: default_trip_profile(),
        }
    }

    fn validate(&self, id: &str) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(format!("load `{id}`: {m}")));
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        match self {
            LoadKind::TwoState { on_power } => {
                if !(on_power.is_finite() && *on_power > 0.0) {
                    return bad("on_power must be positive");
                }
            }
            LoadKind::MultiState {
                levels,
                mean_dwell_secs,
            } => {
                if levels.is_empty() || !levels.iter().all(|&l| ok(l) && l > 0.0) {
                    return bad("levels must be positive");
                }
                if !(mean_dwell_secs.is_finite() && *mean_dwell_secs > 0.0) {
                    return bad("mean_dwell_secs must be positive");
                }
            }
            LoadKind::Vfd {
                min_power,
                max_power,
                drift_sigma,
                start_power,
            } => {
                if !(min_power.is_finite() && max_power.is_finite())
                    || !(0.0 < *min_power && min_power < max_power)
                {
                    return bad("need 0 < min_power < max_power");
                }
                if !ok(*drift_sigma) {
                    return bad("drift_sigma must be ≥ 0");
                }
                if let Some(s) = start_power {
                    if !(min_power <= s && s <= max_power) {
                        return bad("start_power outside the band");
                    }
                }
            }
            LoadKind::Elevator {
                base_power,
                trip_power,
                trip_duration_secs,
                trips_per_hour,
            } => {
                if !ok(*base_power) {
                    return bad("base_power must be ≥ 0");
                }
                if !(ok(trip_power[0]) && trip_power[0] <= trip_power[1] && trip_power[1].is_finite()) {
                    return bad("invalid trip_power range");
                }
                if !(trip_duration_secs[0] > 0.0
                    && trip_duration_secs[0] <= trip_duration_secs[1]
                    && trip_duration_secs[1].is_finite())
                {
                    return bad("invalid trip_duration_secs range");
                }
                if trips_per_hour.len() != 24 || !trips_per_hour.iter().all(|&r| ok(r)) {
                    return bad("trips_per_hour needs 24 non-negative rates");
                }
            }
        }
        Ok(())
    }
}

/// Trips per hour for each local hour of the day.
pub fn default_trip_profile() -> Vec<f64> {
    (0..24)
        .map(|h| match h {
            9..=17 => 9.6,
            8 | 18 => 4.0,
            _ => 0.0,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: LoadKind,
    #[serde(default = "Schedule::always")]
    pub schedule: Schedule,
    /// Standard deviation of Gaussian measurement noise while drawing power.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl LoadSpec {
    pub fn new(id: impl Into<String>, kind: LoadKind, schedule: Schedule) -> Self {
        Self {
            id: id.into(),
            kind,
            schedule,
            noise_sigma: 0.0,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate(&self.id)?;
        self.schedule.validate()?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "load `{}`: noise_sigma must be ≥ 0",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorSpec {
    pub id: String,
    pub loads: Vec<LoadSpec>,
}

/// 2014-06-02 00:00 in UTC+05:30 (a Monday).
pub const DEFAULT_START: i64 = 1_401_647_400;
pub const DEFAULT_UTC_OFFSET: i64 = 19_800;

fn default_building_id() -> String {
    "building".into()
}
fn default_period() -> i64 {
    30
}
fn default_start() -> i64 {
    DEFAULT_START
}
fn default_offset() -> i64 {
    DEFAULT_UTC_OFFSET
}

/// Everything needed to generate one building corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingSpec {
    #[serde(default = "default_building_id")]
    pub id: String,
    pub floors: Vec<FloorSpec>,
    /// Loads that share one master schedule.
    #[serde(default)]
    pub hvac_sync_group: Vec<String>,
    /// Master schedule for the sync group; defaults to the schedule of the
    /// group's first member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sync_schedule: Option<Schedule>,
    pub seed: u64,
    #[serde(default = "default_period")]
    pub period: i64,
    pub span_days: i64,
    #[serde(default = "default_start")]
    pub start_time: i64,
    #[serde(default = "default_offset")]
    pub utc_offset: i64,
}

impl BuildingSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.period <= 0 {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if self.span_days < 1 {
            return bad(format!("span_days must be ≥ 1, got {}", self.span_days));
        }
        if self.floors.is_empty() {
            return bad("no floors".into());
        }
        let mut ids = HashSet::new();
        ids.insert(self.id.as_str());
        for f in &self.floors {
            if !ids.insert(&f.id) {
                return bad(format!("duplicate id `{}`", f.id));
            }
            if f.loads.is_empty() {
                return bad(format!("floor `{}` has no loads", f.id));
            }
            for l in &f.loads {
                if !ids.insert(&l.id) {
                    return bad(format!("duplicate id `{}`", l.id));
                }
                l.validate()?;
            }
        }
        for g in &self.hvac_sync_group {
            if self.load(g).is_none() {
                return bad(format!("sync-group member `{g}` is not a load"));
            }
        }
        if let Some(s) = &self.sync_schedule {
            s.validate()?;
        }
        Ok(())
    }

    pub fn load(&self, id: &str) -> Option<&LoadSpec> {
        self.loads().find(|l| l.id == id)
    }

    pub fn loads(&self) -> impl Iterator<Item = &LoadSpec> {
        self.floors.iter().flat_map(|f| f.loads.iter())
    }

    /// The schedule shared by the sync group, if there is a group.
    pub fn master_schedule(&self) -> Option<&Schedule> {
        if let Some(s) = &self.sync_schedule {
            return (!self.hvac_sync_group.is_empty()).then_some(s);
        }
        let first = self.hvac_sync_group.first()?;
        self.load(first).map(|l| &l.schedule)
    }

    /// The schedule a load actually follows after sync-group override.
    pub fn effective_schedule<'a>(&'a self, load: &'a LoadSpec) -> &'a Schedule {
        if self.hvac_sync_group.contains(&load.id) {
            if let Some(m) = self.master_schedule() {
                return m;
            }
        }
        &load.schedule
    }

    /// Number of samples in the generated series.
    pub fn num_samples(&self) -> usize {
        (self.span_days * SECS_PER_DAY / self.period) as usize
    }

    /// Copy keeping only two-state loads, all noise removed. Floors left
    /// without loads are dropped.
    pub fn two_state_only(&self) -> BuildingSpec {
        let mut out = self.clone();
        for f in &mut out.floors {
            f.loads.retain(|l| matches!(l.kind, LoadKind::TwoState { .. }));
            for l in &mut f.loads {
                l.noise_sigma = 0.0;
            }
        }
        out.floors.retain(|f| !f.loads.is_empty());
        let master = self.master_schedule().cloned();
        let kept: HashSet<String> = out.loads().map(|l| l.id.clone()).collect();
        out.hvac_sync_group.retain(|g| kept.contains(g));
        if out.sync_schedule.is_none() && !out.hvac_sync_group.is_empty() {
            out.sync_schedule = master;
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: BuildingSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}
