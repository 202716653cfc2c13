//! Coverage studies, PIT studies and oracle runs on top of `acdc-core`.
//!
//! A study is described by an [`ExperimentConfig`] (TOML). Replicates run in
//! parallel, each on its own seed stream keyed by replicate index, so results do
//! not depend on scheduling.

pub mod config;
pub mod error;
pub mod oracle;
pub mod presets;
pub mod report;
pub mod study;

pub use config::ExperimentConfig;
pub use error::{HarnessError, HarnessResult};
pub use study::{run_coverage_study, run_pit_study, run_replicate, CoverageReport};
