use std::io::Write;

use rayon::prelude::*;

use super::model::ApplianceModel;
use crate::error::{Error, Result};
use crate::series::PowerSeries;

/// Largest number of state combinations [`co_disaggregate`] will enumerate.
pub const DEFAULT_COMBINATION_CAP: u64 = 1_000_000;

/// One appliance's share of a disaggregated feed.
#[derive(Debug, Clone, PartialEq)]
pub struct ApplianceTrack {
    pub name: String,
    pub predicted: PowerSeries,
    /// Chosen state per sample; `None` where the aggregate was missing.
    pub states: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisaggResult {
    pub appliances: Vec<ApplianceTrack>,
    /// `aggregate - Σ predictions` per sample, in watts (may be negative).
    pub residual: Vec<Option<f64>>,
    start: i64,
    period: i64,
}

impl DisaggResult {
    /// Assembles a result from tracks read back from disk. The residual must
    /// cover the same grid as the tracks.
    pub fn new(appliances: Vec<ApplianceTrack>, residual: Vec<Option<f64>>, start: i64, period: i64) -> Self {
        Self {
            appliances,
            residual,
            start,
            period,
        }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn period(&self) -> i64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residual.is_empty()
    }

    pub fn track(&self, name: &str) -> Option<&ApplianceTrack> {
        self.appliances.iter().find(|a| a.name == name)
    }

    /// Writes `timestamp,predicted_watts,state_index` for one appliance.
    /// Missing samples leave both value columns empty.
    pub fn write_track_csv<W: Write>(&self, track: &ApplianceTrack, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["timestamp", "predicted_watts", "state_index"])
            .map_err(io_err)?;
        for (i, (p, s)) in track.predicted.values().iter().zip(&track.states).enumerate() {
            w.write_record([
                track.predicted.timestamp(i).to_string(),
                p.map(|v| v.to_string()).unwrap_or_default(),
                s.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `timestamp,residual_watts`.
    pub fn write_residual_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["timestamp", "residual_watts"]).map_err(io_err)?;
        for (i, r) in self.residual.iter().enumerate() {
            w.write_record([
                (self.start + i as i64 * self.period).to_string(),
                r.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(io_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// All state tuples of a model set, indexed in lexicographic order with the
/// first model most significant.
struct Combinations {
    radices: Vec<usize>,
    strides: Vec<usize>,
    /// Total power of each tuple, by lexicographic index.
    totals: Vec<f64>,
    /// Tuple indices ordered by (total, index).
    by_total: Vec<usize>,
    /// For each position in `by_total`, the first position sharing its total.
    run_start: Vec<usize>,
}

impl Combinations {
    fn new(models: &[ApplianceModel]) -> Self {
        let radices: Vec<usize> = models.iter().map(ApplianceModel::num_states).collect();
        let mut strides = vec![1usize; radices.len()];
        for j in (0..radices.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * radices[j + 1];
        }
        let count: usize = radices.iter().product();
        let totals: Vec<f64> = (0..count)
            .map(|idx| {
                let mut t = 0.0;
                for (j, m) in models.iter().enumerate() {
                    t += m.power((idx / strides[j]) % radices[j]);
                }
                t
            })
            .collect();
        let mut by_total: Vec<usize> = (0..count).collect();
        by_total.sort_by(|&a, &b| totals[a].total_cmp(&totals[b]).then(a.cmp(&b)));
        let mut run_start = vec![0; count];
        for p in 1..count {
            run_start[p] = if totals[by_total[p]] == totals[by_total[p - 1]] {
                run_start[p - 1]
            } else {
                p
            };
        }
        Self {
            radices,
            strides,
            totals,
            by_total,
            run_start,
        }
    }

    fn digit(&self, idx: usize, model: usize) -> usize {
        (idx / self.strides[model]) % self.radices[model]
    }

    fn total_at(&self, pos: usize) -> f64 {
        self.totals[self.by_total[pos]]
    }

    /// Tuple minimising `|a - total|`, ties to the lower total and then the
    /// lexicographically smaller tuple.
    fn best(&self, a: f64) -> usize {
        let n = self.by_total.len();
        let above = self.by_total.partition_point(|&c| self.totals[c] <= a);
        let err = |pos: usize| (a - self.total_at(pos)).abs();
        if above == 0 {
            return self.by_total[0];
        }
        let lo = above - 1;
        if above < n && err(above) < err(lo) {
            // First position above `a` always starts its run.
            return self.by_total[above];
        }
        // Rounded error is monotone below `a`, so equal-error totals form a
        // contiguous block ending at `lo`; the lowest of them wins.
        let best_err = err(lo);
        let mut pos = self.run_start[lo];
        while pos > 0 && err(pos - 1) == best_err {
            pos = self.run_start[pos - 1];
        }
        self.by_total[pos]
    }
}

/// Per-sample combinatorial optimisation with the default combination cap.
pub fn co_disaggregate(aggregate: &PowerSeries, models: &[ApplianceModel]) -> Result<DisaggResult> {
    co_disaggregate_with_cap(aggregate, models, DEFAULT_COMBINATION_CAP)
}

/// For every sample independently, picks the state tuple whose total power is
/// closest to the aggregate. Missing aggregate samples give missing outputs.
pub fn co_disaggregate_with_cap(
    aggregate: &PowerSeries,
    models: &[ApplianceModel],
    cap: u64,
) -> Result<DisaggResult> {
    if models.is_empty() {
        return Err(Error::InvalidParameter("no appliance models".into()));
    }
    let combinations: u128 = models.iter().map(|m| m.num_states() as u128).product();
    if combinations > cap as u128 {
        return Err(Error::TooManyCombinations { combinations, cap });
    }
    if aggregate.values().iter().all(Option::is_none) {
        return Err(Error::NoData("aggregate has no present samples".into()));
    }

    let combos = Combinations::new(models);
    let chosen: Vec<Option<usize>> = aggregate
        .values()
        .par_iter()
        .map(|v| v.map(|a| combos.best(a)))
        .collect();

    let mut appliances = Vec::with_capacity(models.len());
    for (j, m) in models.iter().enumerate() {
        let states: Vec<Option<usize>> =
            chosen.iter().map(|c| c.map(|idx| combos.digit(idx, j))).collect();
        let predicted = PowerSeries::new(
            aggregate.start(),
            aggregate.period(),
            states.iter().map(|s| s.map(|s| m.power(s))).collect(),
        )?;
        appliances.push(ApplianceTrack {
            name: m.name().to_string(),
            predicted,
            states,
        });
    }
    let residual = aggregate
        .values()
        .iter()
        .zip(&chosen)
        .map(|(v, c)| match (v, c) {
            (Some(a), Some(idx)) => Some(a - combos.totals[*idx]),
            _ => None,
        })
        .collect();

    Ok(DisaggResult {
        appliances,
        residual,
        start: aggregate.start(),
        period: aggregate.period(),
    })
}
