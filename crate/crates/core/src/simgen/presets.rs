//! Ready-made building specs.

use super::spec::{BuildingSpec, FloorSpec, LoadKind, LoadSpec, Schedule, DEFAULT_START, DEFAULT_UTC_OFFSET};

/// Seed used when none is configured.
pub const DEFAULT_SEED: u64 = 42;

fn two_state(id: &str, watts: f64, schedule: Schedule, noise: f64) -> LoadSpec {
    LoadSpec::new(id, LoadKind::TwoState { on_power: watts }, schedule).with_noise(noise)
}

fn vfd(id: &str, lo: f64, hi: f64, drift: f64, schedule: Schedule) -> LoadSpec {
    LoadSpec::new(
        id,
        LoadKind::Vfd {
            min_power: lo,
            max_power: hi,
            drift_sigma: drift,
            start_power: None,
        },
        schedule,
    )
}

fn building(id: &str, floors: Vec<FloorSpec>, sync: Vec<&str>, seed: u64, span_days: i64) -> BuildingSpec {
    BuildingSpec {
        id: id.into(),
        floors,
        hvac_sync_group: sync.into_iter().map(String::from).collect(),
        sync_schedule: None,
        seed,
        period: 30,
        span_days,
        start_time: DEFAULT_START,
        utc_offset: DEFAULT_UTC_OFFSET,
    }
}

fn floor(id: &str, loads: Vec<LoadSpec>) -> FloorSpec {
    FloorSpec {
        id: id.into(),
        loads,
    }
}

/// Three-floor office block over 28 days at 30 s.
///
/// Each floor has a VFD air handler; the three handlers share a weekday
/// 09:00–17:00 master schedule. One elevator with 400 W standby. Two-state
/// loads are sized as 250·2ⁿ W so every on/off combination has a distinct
/// total.
pub fn campus(seed: u64) -> BuildingSpec {
    let weekdays = Schedule::weekdays;
    let mut spec = building(
        "academic",
        vec![
            floor(
                "floor_1",
                vec![
                    vfd("ahu_1", 3_000.0, 9_000.0, 150.0, weekdays(9.0, 17.0)),
                    two_state("server_1", 250.0, Schedule::always(), 5.0),
                    two_state("lights_1", 500.0, weekdays(8.0, 19.0), 10.0),
                    two_state("plugs_1", 1_000.0, weekdays(9.5, 18.0), 20.0),
                    LoadSpec::new("elevator", LoadKind::default_elevator(), Schedule::always()),
                ],
            ),
            floor(
                "floor_2",
                vec![
                    vfd("ahu_2", 3_000.0, 9_000.0, 150.0, weekdays(9.0, 17.0)),
                    two_state("lights_2", 2_000.0, weekdays(8.5, 18.5), 10.0),
                    two_state("plugs_2", 4_000.0, weekdays(10.0, 16.5), 20.0),
                ],
            ),
            floor(
                "floor_3",
                vec![
                    vfd("ahu_3", 3_000.0, 9_000.0, 150.0, weekdays(9.0, 17.0)),
                    two_state("lights_3", 8_000.0, weekdays(7.5, 20.0), 10.0),
                    two_state("lab_3", 16_000.0, weekdays(11.0, 15.0), 20.0),
                ],
            ),
        ],
        vec!["ahu_1", "ahu_2", "ahu_3"],
        seed,
        28,
    );
    spec.sync_schedule = Some(weekdays(9.0, 17.0));
    spec
}

/// [`campus`] reduced to its noiseless two-state loads.
pub fn campus_two_state(seed: u64) -> BuildingSpec {
    campus(seed).two_state_only()
}

/// A house whose loads follow the same schedule every day of the week.
pub fn residential_flat(seed: u64) -> BuildingSpec {
    let daily = Schedule::daily;
    building(
        "house",
        vec![floor(
            "mains",
            vec![
                two_state("base", 120.0, Schedule::always(), 3.0),
                LoadSpec::new(
                    "fridge",
                    LoadKind::MultiState {
                        levels: vec![90.0, 140.0],
                        mean_dwell_secs: 1_200.0,
                    },
                    Schedule::always(),
                )
                .with_noise(3.0),
                two_state("kettle", 1_800.0, daily(7.0, 7.25), 10.0),
                two_state("lights", 300.0, daily(18.0, 23.0), 5.0),
                two_state("tv", 150.0, daily(19.0, 22.5), 3.0),
            ],
        )],
        vec![],
        seed,
        28,
    )
}

/// Five-floor building for comparing disaggregation at the building and
/// floor meters. The target air handler `ahu_5` runs beside a small plug
/// load on floor 5; the other floors carry air handlers of similar size and
/// unmodelled two-state and VFD loads.
pub fn metering_levels(seed: u64) -> BuildingSpec {
    let weekdays = Schedule::weekdays;
    let mut floors = Vec::new();
    for n in 1..=4 {
        let shift = n as f64 * 0.5;
        floors.push(floor(
            &format!("floor_{n}"),
            vec![
                vfd(&format!("ahu_{n}"), 2_500.0, 6_500.0, 200.0, weekdays(8.0 + shift, 16.0 + shift)),
                two_state(&format!("lights_{n}"), 1_500.0 + 300.0 * n as f64, weekdays(7.5, 19.5), 15.0),
                vfd(&format!("pump_{n}"), 1_000.0, 4_000.0, 250.0, Schedule::daily(6.0 + n as f64, 20.0)),
            ],
        ));
    }
    floors.push(floor(
        "floor_5",
        vec![
            vfd("ahu_5", 3_500.0, 5_000.0, 60.0, weekdays(9.0, 17.0)),
            two_state("plugs_5", 600.0, weekdays(8.0, 18.0), 10.0),
        ],
    ));
    building("block", floors, vec![], seed, 28)
}

/// One floor where a wide-band VFD air handler shares the meter with two
/// two-state loads. A two-state model of the handler cannot follow its
/// continuously varying draw.
pub fn vfd_failure(seed: u64) -> BuildingSpec {
    let weekdays = Schedule::weekdays;
    building(
        "annex",
        vec![floor(
            "floor_g",
            vec![
                vfd("ahu_g", 500.0, 9_500.0, 450.0, weekdays(9.0, 17.0)),
                two_state("lights_g", 2_500.0, weekdays(8.0, 19.0), 10.0),
                two_state("chiller_pump_g", 3_500.0, weekdays(10.0, 16.0), 10.0),
            ],
        )],
        vec![],
        seed,
        28,
    )
}
