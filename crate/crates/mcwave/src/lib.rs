#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment runner and file formats behind the `mcwave` command.

pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod plot;

pub use config::ExperimentConfig;
pub use error::{AppError, AppResult};
pub use experiment::{run_convergence, RateResult, RunOutput, TrialRow};
