//! Local-time helpers over UTC epoch seconds.
//!
//! All analyses that care about "days" or "hours" take an explicit UTC offset
//! in seconds and never consult the host time zone.

pub const SECS_PER_HOUR: i64 = 3_600;
pub const SECS_PER_DAY: i64 = 86_400;
pub const SECS_PER_WEEK: i64 = 7 * SECS_PER_DAY;

/// Day of the week, Monday first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];

    /// Zero-based index with Monday = 0.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Weekday {
        Weekday::ALL[i % 7]
    }

    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Sat | Weekday::Sun)
    }

    pub fn short_name(self) -> &'static str {
        ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"][self.index()]
    }
}

/// Local seconds since the epoch.
fn local(ts: i64, utc_offset: i64) -> i64 {
    ts + utc_offset
}

/// Number of whole local days since 1970-01-01 (negative before the epoch).
pub fn local_day(ts: i64, utc_offset: i64) -> i64 {
    local(ts, utc_offset).div_euclid(SECS_PER_DAY)
}

pub fn weekday(ts: i64, utc_offset: i64) -> Weekday {
    // 1970-01-01 was a Thursday.
    Weekday::from_index((local_day(ts, utc_offset) + 3).rem_euclid(7) as usize)
}

/// Local hour of day, 0..24.
pub fn hour_of_day(ts: i64, utc_offset: i64) -> usize {
    (local(ts, utc_offset).rem_euclid(SECS_PER_DAY) / SECS_PER_HOUR) as usize
}

/// Seconds elapsed since the most recent local Monday 00:00.
pub fn second_of_week(ts: i64, utc_offset: i64) -> i64 {
    // Epoch day 0 is a Thursday, so Monday 1969-12-29 is day -3.
    (local(ts, utc_offset) + 3 * SECS_PER_DAY).rem_euclid(SECS_PER_WEEK)
}

/// `YYYY-MM-DD` for a day count since 1970-01-01 (proleptic Gregorian).
pub fn format_day(days: i64) -> String {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1_460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    format!("{y:04}-{m:02}-{d:02}")
}
