//! Config-driven experiment laboratory: presets, reports, and the runner
//! behind the command-line interface.

pub mod config;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use report::CutoffReport;
