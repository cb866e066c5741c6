//! Experiment orchestration: configuration, measurement and extraction
//! over a frequency grid, artifact files and CSV tables.

pub mod artifacts;
pub mod config;
pub mod experiment;
pub mod tables;

pub use config::{ExperimentConfig, Orders, ProbeCase, ProbePreset};
pub use experiment::{with_threads, Experiment, MeasurementSet};
pub use tables::{cond_table, field_map, geometry_table, sweep_table, MapSweep, Table};
