//! Data generation, file formats, simulation presets and plotting for the
//! `lloyd` command-line tool.

pub mod experiments;
pub mod io;
pub mod svg;

pub use experiments::{run_experiment, ArmSummary, ExperimentConfig, Preset, TraceRow};
