//! Correlation between air handlers, kNN entropy per meter and the
//! hour-of-week heatmap of the building feed.

use hnilm::analysis::{correlation_matrix, entropy_by_level, hourwise_matrix};
use hnilm::calendar::Weekday;
use hnilm::simgen::{presets, simulate_building};

fn main() -> hnilm::Result<()> {
    let spec = presets::campus(presets::DEFAULT_SEED);
    let h = simulate_building(&spec)?;

    let feeds: Vec<_> = ["ahu_1", "ahu_2", "ahu_3", "lights_3"]
        .iter()
        .map(|id| h.series(id).map(|s| (*id, s)))
        .collect::<Result<_, _>>()?;
    let m = correlation_matrix(&feeds)?;
    m.write_csv(std::io::stdout())?;

    println!();
    let e = entropy_by_level(&h, 3);
    for node in h.iter() {
        if let Some(bits) = e.bits.get(node.id()) {
            println!("{:<9} {:<10} {bits:>7.2} bits", node.level().as_str(), node.id());
        }
    }

    println!();
    let hm = hourwise_matrix(h.series(&spec.id)?, spec.utc_offset);
    for day in Weekday::ALL {
        let row: String = (0..24)
            .map(|hr| match hm.cell(day, hr) {
                v if v > 0.75 => '#',
                v if v > 0.5 => '+',
                v if v > 0.25 => '-',
                _ => '.',
            })
            .collect();
        println!("{} {row}", day.short_name());
    }
    let (wd, we) = hm.day_type_means();
    println!("weekday mean {wd:.3}, weekend mean {we:.3}");
    Ok(())
}
