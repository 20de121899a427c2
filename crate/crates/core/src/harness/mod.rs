//! Experiment configuration, CSV artifacts, and multi-seed runs.

pub mod bundled;
pub mod config;
pub mod experiment;
pub mod io;

pub use config::{ExperimentConfig, InitSpec, Method, ProblemSpec, SetSpec, SvmData, SyntheticSvm};
pub use experiment::{decay_rate, execute, mean_std, run_experiment, RunSummary, SeedRun};
pub use io::{load_labeled_csv, parse_constants, CsvSchema};
