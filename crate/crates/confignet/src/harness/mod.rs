//! Experiment orchestration: config parsing, seeded multi-trial runs, and
//! the prebuilt bench suites.

pub mod config;
pub mod suites;
pub mod trials;

pub use config::{AlgorithmSpec, ExperimentConfig};
pub use suites::{run_suite, BenchOptions, BenchReport};
pub use trials::{run_trials, SuiteResult};
