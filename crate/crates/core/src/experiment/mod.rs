//! Configuration-driven experiments: δ-sweeps, self-similar fits and
//! Monte Carlo cross-checks, each writing CSV tables to an output directory.

mod config;
mod studies;

pub use config::{parse_config, Experiment, ExperimentConfig};
pub use studies::{
    run_convergence_study, run_self_similar_study, run_simulate, run_solve, run_validation_suite,
    tolerance, write_solve, Check, ConvergenceCell, ConvergenceStudy, Model, ModelFit, Quantity,
    QuantityFit, SelfSimilarStudy, SimulateRun, ValidationReport, CONFIG_ECHO, FAILED,
};
