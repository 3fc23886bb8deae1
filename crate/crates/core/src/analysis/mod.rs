//! Discrepancy metrics, convergence-rate and self-similar fits, and
//! sub-density iteration checks.

pub mod convolve;
pub mod discrepancy;
pub mod fit;
pub mod selfsim;

pub use convolve::{convolve_subdensity, convolve_time, nth_jump_cdf, IterationCheck};
pub use discrepancy::{
    cumulative_trapezoid, kolmogorov_distance, sup_discrepancy_density, sup_discrepancy_rate,
    weighted_rate_integral,
};
pub use fit::{fit_power_law, linear_fit, ConvergenceReport, PowerLawFit};
pub use selfsim::{
    extract_profile, fit_self_similar, profile_collapse_error, CollapseWindow, Profile,
    SelfSimilarFit, ThresholdRestriction,
};
