//! Benchmark generation, batch execution, statistics and reports.

mod experiment;
mod fixture;
mod generate;
mod report;
mod results;
pub mod stats;

use thiserror::Error;

use crate::belief::BeliefError;
use crate::dqn::DqnError;
use crate::envfile::EnvFileError;
use crate::graph::GraphError;
use crate::hunt::HuntError;

pub use experiment::{
    arrangement_seed, make_planner, run_cell, run_experiment, run_on_environment, CellOptions, ExperimentSpec,
    HuntCost, TrialResult,
};
pub use fixture::{line_fixture, robot_fixture};
pub use generate::{generate_environment, MAX_LOCATIONS_PER_OBJECT};
pub use report::{build_report, Report, REPORT_FILES};
pub use results::{read_results, write_results, RESULTS_HEADER};
pub use stats::{ci95, paired_t, welch_t, SummaryStats, TTest};

#[derive(Debug, Error)]
pub enum BenchError {
    /// The request is well-formed but cannot be carried out.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error("statistics: {0}")]
    Stats(String),
    #[error("malformed results: {0}")]
    Results(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Hunt(#[from] HuntError),
    #[error(transparent)]
    EnvFile(#[from] EnvFileError),
    #[error(transparent)]
    Dqn(#[from] DqnError),
}
