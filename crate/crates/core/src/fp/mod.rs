//! Finite-volume Fokker–Planck solvers on a logistically scaled grid.

pub mod grid;
pub mod scheme;
pub mod solver;
pub mod tridiag;

pub use grid::{build_logistic_grid, inverse_logistic, logistic, metric, LogisticGrid};
pub use scheme::{
    firing_rate_quadrature, interp_density, maxwellian, DensityState, FiringSeries, InitialDatum,
    SgScheme, SolverConfig, SolverMode,
};
pub use solver::{
    solve_discharge_fp, solve_fp, solve_fp_with, solve_hard_wall_fp, step_semi_implicit, Snapshot,
    SolveOutput,
};
pub use tridiag::{thomas_solve, Tridiagonal};
