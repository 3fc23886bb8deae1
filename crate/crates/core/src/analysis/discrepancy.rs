//! Sup-norm discrepancies and related functionals on common grids.

use crate::error::{Error, Result};
use crate::fp::FiringSeries;

fn sup_abs_diff(a: &[f64], b: &[f64], what: &str) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "{what}: grids differ ({} vs {} points)",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

fn same_times(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

/// `max_j |fA_j - fB_j|` for densities sampled on the same physical nodes.
pub fn sup_discrepancy_density(fa: &[f64], fb: &[f64]) -> Result<f64> {
    sup_abs_diff(fa, fb, "density discrepancy")
}

/// `max_m |NA(t_m) - NB(t_m)|` over a shared time grid.
pub fn sup_discrepancy_rate(na: &FiringSeries, nb: &FiringSeries) -> Result<f64> {
    if !same_times(&na.times, &nb.times) {
        return Err(Error::invalid("firing-rate discrepancy: time grids differ"));
    }
    sup_abs_diff(&na.values, &nb.values, "firing-rate discrepancy")
}

/// `max_j |A_j - B_j|` for two CDFs evaluated on one grid.
pub fn kolmogorov_distance(cdf_a: &[f64], cdf_b: &[f64]) -> Result<f64> {
    sup_abs_diff(cdf_a, cdf_b, "Kolmogorov distance")
}

/// Trapezoid approximation of `∫ φ(t) N(t) dt` with `φ` sampled at the
/// series' times.
pub fn weighted_rate_integral(n: &FiringSeries, phi: &[f64]) -> Result<f64> {
    if phi.len() != n.len() {
        return Err(Error::invalid(
            "weight and firing series have different lengths",
        ));
    }
    let mut s = 0.0;
    for k in 1..n.len() {
        let dt = n.times[k] - n.times[k - 1];
        s += 0.5 * dt * (phi[k - 1] * n.values[k - 1] + phi[k] * n.values[k]);
    }
    Ok(s)
}

/// Cumulative trapezoid integral of `f` over increasing nodes `x`.
pub fn cumulative_trapezoid(x: &[f64], f: &[f64]) -> Result<Vec<f64>> {
    if x.len() != f.len() || x.is_empty() {
        return Err(Error::invalid(
            "cumulative integral needs matching, nonempty grids",
        ));
    }
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..x.len() {
        acc += 0.5 * (x[k] - x[k - 1]) * (f[k] + f[k - 1]);
        out.push(acc);
    }
    Ok(out)
}
