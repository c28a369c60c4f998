//! Experiment runner for the quasi-reversibility solver.

pub mod config;
pub mod experiment;
pub mod output;
pub mod pipeline;

use thiserror::Error;

pub use config::{DerivativeSource, ExperimentConfig};
pub use experiment::{run_convergence_sweep, run_experiment, reference_errors, Bundle, SweepReport};
pub use pipeline::{run_case, Case, CaseResult};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error(transparent)]
    Data(#[from] qr_cauchy::data::DataError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
