use std::io::Write;

use serde::Serialize;

use crate::calendar::{hour_of_day, weekday, Weekday};
use crate::error::{Error, Result};
use crate::series::PowerSeries;

/// Mean hourly energy by local day of week (rows, Monday first) and hour of
/// day (columns), scaled so the largest cell is 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HourwiseMatrix {
    pub values: [[f64; 24]; 7],
}

impl HourwiseMatrix {
    pub fn cell(&self, day: Weekday, hour: usize) -> f64 {
        self.values[day.index()][hour]
    }

    /// Mean cell value over weekdays and over weekend days.
    pub fn day_type_means(&self) -> (f64, f64) {
        let mean = |rows: &[[f64; 24]]| {
            rows.iter().flatten().sum::<f64>() / (rows.len() * 24) as f64
        };
        (mean(&self.values[..5]), mean(&self.values[5..]))
    }

    /// Header `day,h00,...,h23`, one row per weekday.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let e = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec!["day".to_string()];
        header.extend((0..24).map(|h| format!("h{h:02}")));
        w.write_record(&header).map_err(e)?;
        for (d, row) in self.values.iter().enumerate() {
            let mut rec = vec![Weekday::from_index(d).short_name().to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the normalised hour-of-week energy matrix.
///
/// Each cell is the mean power of the samples falling in that local
/// (day-of-week, hour) slot, i.e. the mean energy per hour; cells without
/// samples are 0. An all-zero series yields an all-zero matrix.
pub fn hourwise_matrix(series: &PowerSeries, utc_offset: i64) -> HourwiseMatrix {
    let mut sums = [[0.0; 24]; 7];
    let mut counts = [[0usize; 24]; 7];
    for (t, w) in series.iter_present() {
        let (d, h) = (weekday(t, utc_offset).index(), hour_of_day(t, utc_offset));
        sums[d][h] += w;
        counts[d][h] += 1;
    }
    let mut values = [[0.0; 24]; 7];
    for d in 0..7 {
        for h in 0..24 {
            if counts[d][h] > 0 {
                values[d][h] = sums[d][h] / counts[d][h] as f64;
            }
        }
    }
    let max = values.iter().flatten().copied().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().flatten().for_each(|v| *v /= max);
    }
    HourwiseMatrix { values }
}
