//! Step-change event detection and per-day event statistics.
//!
//! An event is a change between two consecutive samples whose magnitude
//! strictly exceeds a threshold. No grouping of multi-sample ramps is done:
//! a slowly drifting load shows up as many small events.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::calendar::local_day;
use crate::error::{Error, Result};
use crate::series::{align_all, PowerSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    /// Index of the later sample of the pair; always ≥ 1.
    pub index: usize,
    pub timestamp: i64,
    /// `v[index] - v[index - 1]` in watts.
    pub delta: f64,
}

impl Event {
    pub fn is_rising(&self) -> bool {
        self.delta > 0.0
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "event threshold must be positive, got {threshold}"
        )));
    }
    Ok(())
}

/// Emits one event for every consecutive pair with `|Δ| > threshold`.
/// Pairs touching a missing sample are skipped.
pub fn detect_events(series: &PowerSeries, threshold: f64) -> Result<Vec<Event>> {
    check_threshold(threshold)?;
    if series.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    Ok(series
        .values()
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let delta = w[1]? - w[0]?;
            (delta.abs() > threshold).then(|| Event {
                index: i + 1,
                timestamp: series.timestamp(i + 1),
                delta,
            })
        })
        .collect())
}

/// Writes events as `index,timestamp,delta_watts`.
pub fn write_events_csv<W: Write>(events: &[Event], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "timestamp", "delta_watts"])
        .map_err(csv_err)?;
    for e in events {
        w.write_record([
            e.index.to_string(),
            e.timestamp.to_string(),
            e.delta.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Daily event counts and their median and maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventStats {
    /// Local calendar day (days since 1970-01-01 in local time) → events.
    pub per_day_counts: BTreeMap<i64, usize>,
    pub median: f64,
    pub max: usize,
}

impl EventStats {
    fn from_counts(per_day_counts: BTreeMap<i64, usize>) -> Self {
        let mut counts: Vec<usize> = per_day_counts.values().copied().collect();
        counts.sort_unstable();
        let median = median_of_sorted(&counts);
        let max = counts.last().copied().unwrap_or(0);
        Self {
            per_day_counts,
            median,
            max,
        }
    }
}

/// Median; the mean of the two central values for even lengths.
pub(crate) fn median_of_sorted(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    match n {
        0 => 0.0,
        _ if n % 2 == 1 => sorted[n / 2] as f64,
        _ => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

/// Local days touched by the series, each with zero count.
fn empty_days(series: &PowerSeries, utc_offset: i64) -> BTreeMap<i64, usize> {
    if series.is_empty() {
        return BTreeMap::new();
    }
    let first = local_day(series.start(), utc_offset);
    let last = local_day(series.end() - 1, utc_offset);
    (first..=last).map(|d| (d, 0)).collect()
}

/// Counts events per local calendar day.
pub fn daily_event_stats(series: &PowerSeries, threshold: f64, utc_offset: i64) -> Result<EventStats> {
    let events = detect_events(series, threshold)?;
    Ok(stats_from_events(series, &events, utc_offset))
}

fn stats_from_events(series: &PowerSeries, events: &[Event], utc_offset: i64) -> EventStats {
    let mut days = empty_days(series, utc_offset);
    for e in events {
        *days.entry(local_day(e.timestamp, utc_offset)).or_insert(0) += 1;
    }
    EventStats::from_counts(days)
}

/// Median daily event count for each threshold, in the order given.
pub fn threshold_sweep(
    series: &PowerSeries,
    thresholds: &[f64],
    utc_offset: i64,
) -> Result<Vec<(f64, f64)>> {
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("no thresholds given".into()));
    }
    thresholds.iter().try_for_each(|&t| check_threshold(t))?;
    // Detect once at the lowest threshold; higher thresholds are subsets.
    let lowest = thresholds.iter().copied().fold(f64::INFINITY, f64::min);
    let base = detect_events(series, lowest)?;
    Ok(thresholds
        .iter()
        .map(|&t| {
            let kept: Vec<Event> = base.iter().copied().filter(|e| e.delta.abs() > t).collect();
            (t, stats_from_events(series, &kept, utc_offset).median)
        })
        .collect())
}

/// Intervals in which two or more feeds each show an event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simultaneity {
    /// Number of consecutive-sample intervals examined.
    pub intervals: usize,
    /// Timestamp (of the later sample) of each interval with a collision.
    pub colliding: Vec<i64>,
}

impl Simultaneity {
    pub fn rate(&self) -> f64 {
        if self.intervals == 0 {
            0.0
        } else {
            self.colliding.len() as f64 / self.intervals as f64
        }
    }
}

/// Finds intervals where at least two distinct feeds step simultaneously.
pub fn simultaneous_events(feeds: &[&PowerSeries], threshold: f64) -> Result<Simultaneity> {
    if feeds.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two feeds".into(),
        ));
    }
    let aligned = align_all(feeds)?;
    let n = aligned[0].len();
    let mut hits = vec![0u32; n];
    for s in &aligned {
        if s.len() < 2 {
            return Err(Error::TooShort { needed: 2, got: s.len() });
        }
        for e in detect_events(s, threshold)? {
            hits[e.index] += 1;
        }
    }
    let colliding = hits
        .iter()
        .enumerate()
        .filter(|(_, &h)| h >= 2)
        .map(|(i, _)| aligned[0].timestamp(i))
        .collect();
    Ok(Simultaneity {
        intervals: n - 1,
        colliding,
    })
}

/// Fraction of intervals in which two or more feeds change state together.
pub fn simultaneous_event_rate(feeds: &[&PowerSeries], threshold: f64) -> Result<f64> {
    simultaneous_events(feeds, threshold).map(|s| s.rate())
}
