//! Trains two-state models on sub-metered feeds and disaggregates the same
//! air handler from the building meter and from its floor meter.

use std::collections::BTreeMap;

use hnilm::disagg::{co_disaggregate, split_halves, train_states, TrainConfig};
use hnilm::metrics::evaluate;
use hnilm::series::resample;
use hnilm::simgen::{presets, simulate_building};
use hnilm::MeterHierarchy;

fn run(h: &MeterHierarchy, aggregate: &str, appliances: &[&str]) -> hnilm::Result<()> {
    let feed = |id: &str| resample(h.series(id)?, 60);
    let (_, test) = split_halves(&feed(aggregate)?);
    let mut models = Vec::new();
    let mut truth = BTreeMap::new();
    for id in appliances {
        let (train, held_out) = split_halves(&feed(id)?);
        let trained = train_states(id, &train, &TrainConfig::default())?;
        models.push(trained.model);
        truth.insert(id.to_string(), held_out);
    }
    let result = co_disaggregate(&test, &models)?;
    let report = evaluate(&truth, &result, 10.0)?;
    println!("aggregate `{aggregate}`:");
    for (m, score) in models.iter().zip(&report.appliances) {
        println!(
            "  {:<8} states {:>7.0?}  F {:.3}  NEP {:.3}",
            score.appliance,
            m.states(),
            score.f_score,
            score.nep
        );
    }
    Ok(())
}

fn main() -> hnilm::Result<()> {
    let h = simulate_building(&presets::metering_levels(presets::DEFAULT_SEED))?;
    run(&h, "block", &["ahu_1", "ahu_2", "ahu_3", "ahu_4", "ahu_5"])?;
    run(&h, "floor_5", &["ahu_5", "plugs_5"])
}
