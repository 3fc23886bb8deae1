//! Monte Carlo simulation of the hard-wall and random-discharge processes.

pub mod empirical;
pub mod ensemble;
pub mod export;
pub mod ou;
pub mod path;
pub mod simulate;

pub use empirical::{
    empirical_cdf, empirical_firing_rate, empirical_jump_time_density, empirical_sub_cdf,
    jump_probability, mean_jump_count, states_at, sub_cdf_count, survival, EmpiricalCdf,
    FiringEstimate, Histogram,
};
pub use ensemble::{coupled_ensemble, simulate_ensemble, simulate_path, PathKind};
pub use export::{firing_estimate_to_csv, paths_to_csv};
pub use ou::{ou_step, OuKernel};
pub use path::{CoupledSample, PathRecord, Terminal};
pub use simulate::{
    coupled_with_clock, path_rng, simulate_coupled_first_jumps, simulate_discharge,
    simulate_hard_wall, simulate_killed_discharge, SimOptions, StartState,
};
