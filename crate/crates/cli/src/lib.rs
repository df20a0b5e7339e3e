//! Configuration, orchestration and reporting for equiflow experiments.

pub mod commands;
pub mod config;

pub use commands::{execute, Command, Report, SweepRow};
pub use config::{parse_config, ExperimentConfig, InitialData, SweepMode};
