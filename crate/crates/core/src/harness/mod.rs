//! Experiment runner, regret comparators, CSV output and configuration.

mod comparator;
mod config;
mod csv;
mod runner;
pub mod verify;

pub use comparator::{
    best_constant, comparator_value, lipschitz_brute_force, lipschitz_dp, ComparatorClass,
    ComparatorError, ComparatorResult, ComparatorSpec,
};
pub use config::{parse_config, ConfigError};
pub use csv::{emit_csv, format_value, render_csv, CsvError, HEADER};
pub use runner::{
    build_learner, run_experiment, run_replicate, Algorithm, AnyLearner, ExperimentConfig,
    ExperimentResult, RegretTrace, RunError,
};
