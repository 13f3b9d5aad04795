//! Generates the campus preset and writes it as CSV plus `hierarchy.json`.
//!
//! ```text
//! cargo run --release --example simulate_campus -- [out_dir] [seed]
//! ```

use std::path::PathBuf;

use hnilm::hierarchy::validate_hierarchy;
use hnilm::io::{read_hierarchy, write_corpus};
use hnilm::simgen::{presets, simulate_building};

fn main() -> hnilm::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "campus_corpus".into()));
    let seed = args.next().map_or(presets::DEFAULT_SEED, |s| s.parse().expect("seed"));

    let spec = presets::campus(seed);
    let h = simulate_building(&spec)?;
    println!("{:<10} {:<9} {:>8} {:>12}", "node", "level", "samples", "energy kWh");
    for node in h.iter() {
        let s = node.series().expect("simulated nodes are metered");
        println!("{:<10} {:<9} {:>8} {:>12.1}", node.id(), node.level().as_str(), s.len(), s.energy_wh() / 1e3);
    }
    assert!(validate_hierarchy(&h, 0.0).is_empty());

    let path = write_corpus(&h, &out)?;
    let back = read_hierarchy(&path, spec.period)?;
    assert_eq!(back, h);
    println!("wrote {}", path.display());
    Ok(())
}
