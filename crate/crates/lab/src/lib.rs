//! Experiment harness: named, config-driven, seed-reproducible runs of the
//! `noiselab` experiments, plus the acceptance checks behind `lab validate`.

pub mod checks;
pub mod error;
pub mod experiments;
pub mod output;
pub mod runner;

pub use error::{LabError, LabResult};
pub use runner::{run_experiment, ExperimentConfig, RunManifest};
