//! Configuration, experiment dispatch and output files for the `bpre` tool.

pub mod config;
mod run;

pub use config::{ConfigLayer, ExperimentConfig, Format, Kind};
pub use run::{run, sibling, EstimateRecord, Manifest, OutputFile, RunReport, KS_C_01};
