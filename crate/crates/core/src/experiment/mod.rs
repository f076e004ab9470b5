//! Seeded trials, metrics and the preset experiment suites.

pub mod config;
pub mod metrics;
pub mod presets;
pub mod runner;

pub use config::{AutomatonSpec, ExperimentConfig};
pub use metrics::{MetricsTrace, StepRecord, Summary, TrialOutcome};
pub use runner::{run_config, run_suite, run_trial, SuiteOptions, SuiteRow};
