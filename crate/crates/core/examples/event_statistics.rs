//! Event counts per day on the campus building feed, the threshold sweep,
//! and collisions between the synchronised air handlers.

use hnilm::calendar::format_day;
use hnilm::events::{daily_event_stats, simultaneous_events, threshold_sweep};
use hnilm::simgen::{presets, simulate_building};

fn main() -> hnilm::Result<()> {
    let spec = presets::campus(presets::DEFAULT_SEED);
    let h = simulate_building(&spec)?;
    let building = h.series(&spec.id)?;

    let stats = daily_event_stats(building, 100.0, spec.utc_offset)?;
    for (day, n) in stats.per_day_counts.iter().take(7) {
        println!("{}  {n:>4} events above 100 W", format_day(*day));
    }
    println!("median {} max {} per day\n", stats.median, stats.max);

    for (t, median) in threshold_sweep(building, &[100.0, 200.0, 500.0, 1_000.0, 2_000.0, 5_000.0], spec.utc_offset)? {
        println!("threshold {t:>6} W  median {median:>6} events/day");
    }

    let ahus: Vec<_> = spec.hvac_sync_group.iter().map(|id| h.series(id)).collect::<Result<_, _>>()?;
    let sim = simultaneous_events(&ahus, 2_500.0)?;
    println!(
        "\n{} of {} intervals have two or more air handlers switching together (rate {:.2e})",
        sim.colliding.len(),
        sim.intervals,
        sim.rate()
    );
    Ok(())
}
