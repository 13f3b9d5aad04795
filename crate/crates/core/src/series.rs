//! Uniformly sampled active-power series and the grid operations on them.

use crate::error::{Error, Result};

/// Uniformly sampled active power for one meter.
///
/// Sample `i` sits at `start + i * period` (UTC epoch seconds). A sample is
/// either a finite, non-negative wattage or missing (`None`).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    start: i64,
    period: i64,
    values: Vec<Option<f64>>,
}

fn check_period(period: i64) -> Result<()> {
    if period <= 0 {
        return Err(Error::InvalidParameter(format!(
            "period must be positive, got {period}"
        )));
    }
    Ok(())
}

fn check_sample(index: usize, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidSample { index, value });
    }
    Ok(())
}

impl PowerSeries {
    pub fn new(start: i64, period: i64, values: Vec<Option<f64>>) -> Result<Self> {
        check_period(period)?;
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = *v {
                check_sample(i, v)?;
            }
        }
        Ok(Self {
            start,
            period,
            values,
        })
    }

    /// Series without missing samples.
    pub fn from_watts(start: i64, period: i64, watts: Vec<f64>) -> Result<Self> {
        Self::new(start, period, watts.into_iter().map(Some).collect())
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn period(&self) -> i64 {
        self.period
    }

    /// Exclusive end of the covered time range.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 * self.period
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied().flatten()
    }

    pub fn timestamp(&self, i: usize) -> i64 {
        self.start + i as i64 * self.period
    }

    /// Index of the slot containing `ts`, if inside the series.
    pub fn index_of(&self, ts: i64) -> Option<usize> {
        if ts < self.start || ts >= self.end() {
            return None;
        }
        Some(((ts - self.start) / self.period) as usize)
    }

    /// `(timestamp, watts)` for each present sample.
    pub fn iter_present(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|w| (self.timestamp(i), w)))
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Sum of present samples, in watts.
    pub fn sum(&self) -> f64 {
        self.values.iter().flatten().sum()
    }

    /// Mean of present samples; `None` when every sample is missing.
    pub fn mean(&self) -> Option<f64> {
        let (s, n) = self
            .values
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| s / n as f64)
    }

    /// Energy of present samples in watt-hours.
    pub fn energy_wh(&self) -> f64 {
        self.sum() * self.period as f64 / 3_600.0
    }

    /// Applies `f` to each present sample.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.start,
            self.period,
            self.values.iter().map(|v| v.map(&f)).collect(),
        )
    }

    /// Sub-series of samples whose timestamps lie in `[from, to)`.
    ///
    /// The window is clipped to the series; the result may be empty.
    pub fn window(&self, from: i64, to: i64) -> Self {
        let lo = if from <= self.start {
            0
        } else {
            ((from - self.start + self.period - 1) / self.period) as usize
        }
        .min(self.len());
        let hi = if to <= self.start {
            0
        } else {
            ((to - self.start + self.period - 1) / self.period) as usize
        }
        .clamp(lo, self.len());
        Self {
            start: self.timestamp(lo),
            period: self.period,
            values: self.values[lo..hi].to_vec(),
        }
    }

    /// Splits at sample `index`: `[0, index)` and `[index, len)`.
    pub fn split_at(&self, index: usize) -> (Self, Self) {
        let index = index.min(self.len());
        let (a, b) = self.values.split_at(index);
        (
            Self {
                start: self.start,
                period: self.period,
                values: a.to_vec(),
            },
            Self {
                start: self.timestamp(index),
                period: self.period,
                values: b.to_vec(),
            },
        )
    }

    /// Copy with every sample for which `keep` is false marked missing.
    pub fn masked(&self, keep: impl Fn(i64) -> bool) -> Self {
        Self {
            start: self.start,
            period: self.period,
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| if keep(self.timestamp(i)) { *v } else { None })
                .collect(),
        }
    }
}

/// Bins irregular `(timestamp, watts)` samples onto a uniform grid.
///
/// Each slot `[t, t + period)` receives the mean of the raw samples falling
/// inside it; slots with no samples are missing. The grid starts at the first
/// timestamp rounded down to a multiple of `period`.
pub fn regularize(samples: &[(i64, f64)], period: i64) -> Result<PowerSeries> {
    check_period(period)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    for (i, &(_, w)) in samples.iter().enumerate() {
        check_sample(i, w)?;
    }
    let first = samples.iter().map(|s| s.0).min().unwrap_or_default();
    let last = samples.iter().map(|s| s.0).max().unwrap_or_default();
    let start = first.div_euclid(period) * period;
    let slots = ((last - start) / period + 1) as usize;

    let mut sums = vec![0.0; slots];
    let mut counts = vec![0u32; slots];
    for &(t, w) in samples {
        let slot = ((t - start) / period) as usize;
        sums[slot] += w;
        counts[slot] += 1;
    }
    let values = sums
        .into_iter()
        .zip(counts)
        .map(|(s, n)| (n > 0).then(|| s / n as f64))
        .collect();
    PowerSeries::new(start, period, values)
}

/// Downsamples by averaging blocks of `new_period / period` samples.
///
/// Missing samples are ignored inside a block; a block with no present
/// sample is missing. A trailing partial block is dropped.
pub fn resample(series: &PowerSeries, new_period: i64) -> Result<PowerSeries> {
    check_period(new_period)?;
    if new_period % series.period != 0 {
        return Err(Error::IncompatiblePeriod(format!(
            "{new_period} s is not a multiple of {} s",
            series.period
        )));
    }
    let k = (new_period / series.period) as usize;
    if k == 1 {
        return Ok(series.clone());
    }
    let values = series
        .values
        .chunks_exact(k)
        .map(|block| {
            let (s, n) = block
                .iter()
                .flatten()
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            (n > 0).then(|| s / n as f64)
        })
        .collect();
    PowerSeries::new(series.start, new_period, values)
}

fn check_same_grid(a: &PowerSeries, b: &PowerSeries) -> Result<()> {
    if a.period != b.period {
        return Err(Error::IncompatiblePeriod(format!(
            "{} s vs {} s",
            a.period, b.period
        )));
    }
    if (a.start - b.start).rem_euclid(a.period) != 0 {
        return Err(Error::IncompatiblePeriod(format!(
            "grids offset by {} s",
            (a.start - b.start).rem_euclid(a.period)
        )));
    }
    Ok(())
}

/// Restricts both series to their common time range.
pub fn align(a: &PowerSeries, b: &PowerSeries) -> Result<(PowerSeries, PowerSeries)> {
    let mut out = align_all(&[a, b])?;
    let b = out.pop().expect("two outputs");
    let a = out.pop().expect("two outputs");
    Ok((a, b))
}

/// Restricts every series to the intersection of all their time ranges.
pub fn align_all(series: &[&PowerSeries]) -> Result<Vec<PowerSeries>> {
    let Some(first) = series.first() else {
        return Ok(Vec::new());
    };
    for s in &series[1..] {
        check_same_grid(first, s)?;
    }
    let from = series.iter().map(|s| s.start).max().unwrap_or_default();
    let to = series.iter().map(|s| s.end()).min().unwrap_or_default();
    if from >= to {
        return Err(Error::NoOverlap);
    }
    Ok(series.iter().map(|s| s.window(from, to)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(start: i64, period: i64, v: &[f64]) -> PowerSeries {
        PowerSeries::from_watts(start, period, v.to_vec()).unwrap()
    }

    #[test]
    fn regularize_bins_means() {
        let r = regularize(&[(0, 100.0), (10, 200.0)], 30).unwrap();
        assert_eq!(r.values(), &[Some(150.0)]);
        let r = regularize(&[(0, 50.0)], 30).unwrap();
        assert_eq!(r.values(), &[Some(50.0)]);
    }

    #[test]
    fn regularize_marks_gaps_missing() {
        let r = regularize(&[(0, 100.0), (30, 100.0), (95, 40.0)], 30).unwrap();
        assert_eq!(r.start(), 0);
        assert_eq!(r.values(), &[Some(100.0), Some(100.0), None, Some(40.0)]);
    }

    #[test]
    fn regularize_aligns_start_down() {
        let r = regularize(&[(47, 10.0), (61, 20.0)], 30).unwrap();
        assert_eq!(r.start(), 30);
        assert_eq!(r.values(), &[Some(10.0), Some(20.0)]);
    }

    #[test]
    fn regularize_errors() {
        assert!(matches!(regularize(&[], 30), Err(Error::EmptyInput)));
        assert!(matches!(
            regularize(&[(0, -1.0)], 30),
            Err(Error::InvalidSample { .. })
        ));
        assert!(matches!(
            regularize(&[(0, f64::NAN)], 30),
            Err(Error::InvalidSample { .. })
        ));
    }

    #[test]
    fn resample_pairwise_mean() {
        let r = resample(&s(0, 30, &[100.0, 100.0, 200.0, 200.0]), 60).unwrap();
        assert_eq!(r.values(), &[Some(100.0), Some(200.0)]);
        assert_eq!(r.period(), 60);
    }

    #[test]
    fn resample_ignores_missing() {
        let x = PowerSeries::new(0, 30, vec![Some(0.0), Some(300.0), None, Some(300.0)]).unwrap();
        let r = resample(&x, 60).unwrap();
        assert_eq!(r.values(), &[Some(150.0), Some(300.0)]);
        let all_missing = PowerSeries::new(0, 30, vec![None, None]).unwrap();
        assert_eq!(resample(&all_missing, 60).unwrap().values(), &[None]);
    }

    #[test]
    fn resample_identity_and_errors() {
        let x = s(0, 30, &[1.0, 2.0, 3.0]);
        assert_eq!(resample(&x, 30).unwrap(), x);
        assert!(matches!(
            resample(&x, 45),
            Err(Error::IncompatiblePeriod(_))
        ));
    }

    #[test]
    fn align_intersects() {
        let a = s(0, 30, &[1.0; 10]);
        let b = s(60, 30, &[2.0; 10]);
        let (a2, b2) = align(&a, &b).unwrap();
        assert_eq!((a2.start(), a2.end()), (60, 300));
        assert_eq!((b2.start(), b2.end()), (60, 300));
        let (a3, a4) = align(&a, &a).unwrap();
        assert_eq!(a3, a);
        assert_eq!(a4, a);
    }

    #[test]
    fn align_errors() {
        let a = s(0, 30, &[1.0, 1.0]);
        let b = s(120, 30, &[1.0, 1.0]);
        assert!(matches!(align(&a, &b), Err(Error::NoOverlap)));
        let c = s(0, 60, &[1.0, 1.0]);
        assert!(matches!(align(&a, &c), Err(Error::IncompatiblePeriod(_))));
        let d = s(10, 30, &[1.0, 1.0]);
        assert!(matches!(align(&a, &d), Err(Error::IncompatiblePeriod(_))));
    }

    #[test]
    fn window_and_split() {
        let x = s(0, 30, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(x.window(30, 90).values(), &[Some(2.0), Some(3.0)]);
        assert_eq!(x.window(31, 90).values(), &[Some(3.0)]);
        assert!(x.window(500, 600).is_empty());
        let (a, b) = x.split_at(1);
        assert_eq!(a.len(), 1);
        assert_eq!(b.start(), 30);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(PowerSeries::from_watts(0, 0, vec![1.0]).is_err());
        assert!(PowerSeries::from_watts(0, 30, vec![f64::INFINITY]).is_err());
    }
}
