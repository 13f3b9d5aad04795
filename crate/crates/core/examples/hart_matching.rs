//! Edge matching on a hand-built feed and on a simulated elevator.

use hnilm::disagg::{hart_disaggregate, HartConfig};
use hnilm::simgen::{presets, simulate_building};
use hnilm::PowerSeries;

fn main() -> hnilm::Result<()> {
    let feed = PowerSeries::from_watts(0, 60, vec![0.0, 500.0, 1_000.0, 500.0, 0.0, 1_000.0, 400.0])?;
    let r = hart_disaggregate(&feed, &HartConfig::default())?;
    for a in &r.activations {
        println!("on {:>4}s  off {:>4}s  {:>6.1} W", a.on.timestamp, a.off.timestamp, a.power);
    }
    println!("unmatched: {:?}\n", r.unmatched.iter().map(|e| e.delta).collect::<Vec<_>>());

    let h = simulate_building(&presets::campus(presets::DEFAULT_SEED))?;
    let cfg = HartConfig {
        threshold: 1_000.0,
        ..HartConfig::default()
    };
    let r = hart_disaggregate(h.series("elevator")?, &cfg)?;
    let mut durations: Vec<i64> = r.activations.iter().map(|a| a.duration()).collect();
    durations.sort_unstable();
    println!(
        "elevator: {} trips matched, {} edges unmatched, median duration {} s",
        r.activations.len(),
        r.unmatched.len(),
        durations[durations.len() / 2]
    );
    Ok(())
}
