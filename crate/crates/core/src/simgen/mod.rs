//! Synthetic commercial-building corpora with exact ground truth.
//!
//! Loads are generated on a uniform clock from a [`BuildingSpec`], floor
//! meters are the exact sums of their loads and the building meter the exact
//! sum of its floors.

mod generate;
pub mod presets;
mod spec;

pub use generate::{
    gen_elevator, gen_multi_state, gen_two_state, gen_vfd, generate_load, simulate_building, Clock,
};
pub use spec::{
    default_trip_profile, BuildingSpec, FloorSpec, LoadKind, LoadSpec, Schedule, WeeklyInterval,
    DEFAULT_START, DEFAULT_UTC_OFFSET,
};
