//! Numerical laboratory for the integrate-and-fire model with a hard
//! firing threshold and its random-discharge regularization.
//!
//! * [`sim`]: Monte Carlo paths of both processes, their killed variants and
//!   the coupled first-jump construction.
//! * [`fp`]: Scharfetter–Gummel finite-volume solvers for the matching
//!   Fokker–Planck equations on a logistically scaled grid.
//! * [`analysis`]: discrepancy metrics, power-law and self-similar fits,
//!   sub-density convolution.
//! * [`experiment`]: configuration, sweeps and CSV emission behind the CLI.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod fp;
pub mod model;
pub mod sim;
pub mod table;

pub use error::{Error, Result};
pub use model::{discharge_rate, DischargeSpec, RateKind};
