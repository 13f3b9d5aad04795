//! A variable-speed air handler modelled as an on/off load: CO chatters
//! between states while the real load runs continuously.

use hnilm::disagg::{co_disaggregate, train_states, TrainConfig};
use hnilm::metrics::nep;
use hnilm::simgen::{presets, simulate_building};

fn main() -> hnilm::Result<()> {
    let h = simulate_building(&presets::vfd_failure(presets::DEFAULT_SEED))?;
    let names = ["ahu_g", "lights_g", "chiller_pump_g"];
    let models = names
        .iter()
        .map(|id| Ok(train_states(id, h.series(id)?, &TrainConfig::default())?.model))
        .collect::<hnilm::Result<Vec<_>>>()?;
    let r = co_disaggregate(h.series("floor_g")?, &models)?;
    let track = r.track("ahu_g").expect("modelled");
    let truth = h.series("ahu_g")?;

    let switches = track
        .states
        .windows(2)
        .filter(|w| (w[0] != Some(0)) != (w[1] != Some(0)))
        .count();
    let real = truth.values().windows(2).filter(|w| (w[0] > Some(10.0)) != (w[1] > Some(10.0))).count();
    println!("ahu_g model {:?}", models[0].states());
    println!("predicted on/off switches {switches}, actual {real}");
    println!("NEP {:.3}", nep(truth, &track.predicted)?);

    // One weekday morning, 10 minutes apart.
    let day = 24 * 60 * 2;
    for i in (day + 9 * 120..day + 11 * 120).step_by(20) {
        println!(
            "  t={}  true {:>6.0} W  predicted {:>6.0} W",
            truth.timestamp(i),
            truth.get(i).unwrap_or(f64::NAN),
            track.predicted.get(i).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
