//! Appliance state models and the two disaggregators: per-sample
//! combinatorial optimisation ([`co_disaggregate`]) and rising/falling edge
//! matching ([`hart_disaggregate`]).

mod co;
mod hart;
mod model;
mod split;
mod train;

pub use co::{co_disaggregate, co_disaggregate_with_cap, ApplianceTrack, DisaggResult, DEFAULT_COMBINATION_CAP};
pub use hart::{hart_disaggregate, Activation, HartConfig, HartResult};
pub use model::ApplianceModel;
pub use split::{split_halves, temporal_split, DayTypeSplit};
pub use train::{kmeans_1d, train_states, TrainConfig, Trained, TrainingWarning};
