//! Experiment orchestration for `rcdstab`: strict JSON configs in, plot-ready
//! CSV and JSON artifacts out.

pub mod artifacts;
pub mod config;
pub mod experiments;

pub use artifacts::{verify_manifest, RunManifest};
pub use config::{load_config, parse_config, ExperimentConfig, LoadedConfig, Overrides};
pub use experiments::{run_experiment, Outcome};
