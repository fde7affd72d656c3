//! Experiment harness for the `glbm-core` library: configuration,
//! orchestration, and file output.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{ExperimentSpec, Kind};
pub use error::HarnessError;
pub use output::RunManifest;
