//! Load disaggregation and diagnostics for hierarchically metered
//! commercial buildings.
//!
//! The crate is organised around a [`PowerSeries`] on a uniform grid and a
//! [`MeterHierarchy`] of such series:
//!
//! * [`events`] detects step changes and summarises them per day.
//! * [`disagg`] trains finite-state appliance models and splits an aggregate
//!   feed by combinatorial optimisation or edge matching.
//! * [`metrics`] scores a split with F-score and NEP.
//! * [`analysis`] computes stream correlation, kNN entropy per meter and
//!   hour-of-week energy matrices.
//! * [`simgen`] generates synthetic buildings with exact ground truth.
//! * [`io`] reads and writes the CSV and JSON formats; [`cli`] backs the
//!   `hnilm` binary.

pub mod analysis;
pub mod calendar;
pub mod cli;
pub mod disagg;
pub mod error;
pub mod events;
pub mod hierarchy;
pub mod io;
pub mod metrics;
pub mod seed;
pub mod series;
pub mod simgen;

pub use error::{Error, Result};
pub use hierarchy::{Level, MeterHierarchy, MeterNode};
pub use series::PowerSeries;
