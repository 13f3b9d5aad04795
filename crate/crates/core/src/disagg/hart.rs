use std::io::Write;

use crate::error::{Error, Result};
use crate::events::{detect_events, Event};
use crate::series::PowerSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HartConfig {
    /// Event detection threshold in watts.
    pub threshold: f64,
    /// Largest accepted relative difference between rise and fall magnitude.
    pub match_tolerance_fraction: f64,
    /// Longest ON duration (seconds) a pair may span.
    pub max_on_duration: i64,
}

impl Default for HartConfig {
    fn default() -> Self {
        Self {
            threshold: 100.0,
            match_tolerance_fraction: 0.1,
            max_on_duration: 12 * 3_600,
        }
    }
}

/// One reconstructed appliance run: a rising edge and its matching fall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub on: Event,
    pub off: Event,
    /// Mean of the rise and fall magnitudes, in watts.
    pub power: f64,
}

impl Activation {
    pub fn duration(&self) -> i64 {
        self.off.timestamp - self.on.timestamp
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HartResult {
    pub activations: Vec<Activation>,
    /// Events left without a partner, in index order.
    pub unmatched: Vec<Event>,
}

impl HartResult {
    /// Writes `on_timestamp,off_timestamp,power_watts`.
    pub fn write_activations_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(["on_timestamp", "off_timestamp", "power_watts"])
            .map_err(e)?;
        for a in &self.activations {
            w.write_record([
                a.on.timestamp.to_string(),
                a.off.timestamp.to_string(),
                a.power.to_string(),
            ])
            .map_err(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Edge-matching disaggregation.
///
/// Each falling edge is paired with the earliest still-unmatched rising edge
/// whose magnitude agrees within `match_tolerance_fraction` (relative to the
/// rise) and which is no older than `max_on_duration`.
pub fn hart_disaggregate(aggregate: &PowerSeries, config: &HartConfig) -> Result<HartResult> {
    let tol = config.match_tolerance_fraction;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "match tolerance must lie in (0, 1), got {tol}"
        )));
    }
    if config.max_on_duration <= 0 {
        return Err(Error::InvalidParameter("max_on_duration must be positive".into()));
    }
    let events = detect_events(aggregate, config.threshold)?;

    let mut pending: Vec<Event> = Vec::new();
    let mut result = HartResult::default();
    for ev in events {
        if ev.is_rising() {
            pending.push(ev);
            continue;
        }
        let fall = -ev.delta;
        let partner = pending.iter().position(|rise| {
            ev.timestamp - rise.timestamp <= config.max_on_duration
                && (rise.delta - fall).abs() <= tol * rise.delta
        });
        match partner {
            Some(p) => {
                let on = pending.remove(p);
                result.activations.push(Activation {
                    on,
                    off: ev,
                    power: (on.delta + fall) / 2.0,
                });
            }
            None => result.unmatched.push(ev),
        }
    }
    result.unmatched.extend(pending);
    result.unmatched.sort_by_key(|e| e.index);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> PowerSeries {
        PowerSeries::from_watts(0, 10, v.to_vec()).unwrap()
    }

    #[test]
    fn single_pair() {
        let r = hart_disaggregate(&s(&[0.0, 500.0, 500.0, 500.0, 500.0, 0.0]), &HartConfig::default())
            .unwrap();
        assert_eq!(r.activations.len(), 1);
        let a = r.activations[0];
        assert_eq!((a.on.timestamp, a.off.timestamp, a.power), (10, 50, 500.0));
        assert!(r.unmatched.is_empty());
    }

    #[test]
    fn magnitude_mismatch_stays_unmatched() {
        let r = hart_disaggregate(&s(&[0.0, 500.0, 300.0]), &HartConfig::default()).unwrap();
        assert!(r.activations.is_empty());
        assert_eq!(r.unmatched.len(), 2);
    }

    #[test]
    fn earliest_first() {
        let r = hart_disaggregate(&s(&[0.0, 500.0, 1000.0, 500.0, 0.0]), &HartConfig::default())
            .unwrap();
        let pairs: Vec<_> = r
            .activations
            .iter()
            .map(|a| (a.on.index, a.off.index))
            .collect();
        assert_eq!(pairs, vec![(1, 3), (2, 4)]);
    }

    #[test]
    fn horizon_limits_pairing() {
        let cfg = HartConfig {
            max_on_duration: 20,
            ..HartConfig::default()
        };
        let r = hart_disaggregate(&s(&[0.0, 500.0, 500.0, 500.0, 0.0]), &cfg).unwrap();
        assert!(r.activations.is_empty());
        assert_eq!(r.unmatched.iter().map(|e| e.index).collect::<Vec<_>>(), vec![1, 4]);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let cfg = HartConfig {
            match_tolerance_fraction: 1.0,
            ..HartConfig::default()
        };
        assert!(hart_disaggregate(&s(&[0.0, 1.0]), &cfg).is_err());
    }
}
