use crate::calendar::weekday;
use crate::series::PowerSeries;

/// Weekday and weekend views of one series on the original grid; samples
/// belonging to the other day type are missing.
#[derive(Debug, Clone, PartialEq)]
pub struct DayTypeSplit {
    pub weekday: PowerSeries,
    pub weekend: PowerSeries,
}

/// Partitions samples by local day of week; Saturday and Sunday are weekend.
pub fn temporal_split(series: &PowerSeries, utc_offset: i64) -> DayTypeSplit {
    DayTypeSplit {
        weekday: series.masked(|t| !weekday(t, utc_offset).is_weekend()),
        weekend: series.masked(|t| weekday(t, utc_offset).is_weekend()),
    }
}

/// First half for training, second half for testing.
pub fn split_halves(series: &PowerSeries) -> (PowerSeries, PowerSeries) {
    series.split_at(series.len() / 2)
}
