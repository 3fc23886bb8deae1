//! Renewal-type time convolutions of sub-distribution functions.

use crate::error::{Error, Result};

/// Comparison of a convolved sub-CDF with its Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationCheck {
    pub n: usize,
    pub convolved: Vec<f64>,
    pub empirical: Vec<f64>,
    pub l1_error: f64,
}

impl IterationCheck {
    pub fn new(n: usize, convolved: Vec<f64>, empirical: Vec<f64>) -> Result<Self> {
        if convolved.len() != empirical.len() {
            return Err(Error::invalid("iteration check needs matching samples"));
        }
        for v in convolved.iter().chain(&empirical) {
            if !(-1e-12..=1.0 + 1e-12).contains(v) {
                return Err(Error::invalid(format!(
                    "sub-distribution value {v} outside [0, 1]"
                )));
            }
        }
        let l1_error = convolved
            .iter()
            .zip(&empirical)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / convolved.len().max(1) as f64;
        Ok(Self {
            n,
            convolved,
            empirical,
            l1_error,
        })
    }
}

fn check_uniform(t_grid: &[f64]) -> Result<f64> {
    if t_grid.len() < 2 {
        return Err(Error::invalid("time grid needs at least two points"));
    }
    let dt = t_grid[1] - t_grid[0];
    if !(dt > 0.0) || t_grid[0].abs() > 1e-12 {
        return Err(Error::invalid("time grid must start at 0 and increase"));
    }
    for (k, &t) in t_grid.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-9 * dt.max(t.abs()) {
            return Err(Error::invalid("time grid is not uniform"));
        }
    }
    Ok(dt)
}

/// Trapezoid approximation of `(a ⋆ f)(t_k) = ∫_0^{t_k} a(t_k - s) f(s) ds`.
pub fn convolve_time(a: &[f64], f: &[f64], t_grid: &[f64]) -> Result<Vec<f64>> {
    let dt = check_uniform(t_grid)?;
    if a.len() != t_grid.len() || f.len() != t_grid.len() {
        return Err(Error::invalid(
            "convolution operands do not match the time grid",
        ));
    }
    Ok((0..t_grid.len())
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            let inner: f64 = (1..k).map(|i| a[k - i] * f[i]).sum();
            dt * (inner + 0.5 * (a[k] * f[0] + a[0] * f[k]))
        })
        .collect())
}

/// `F_n(x, t) = ∫_0^t F_{n-1}(x, t - s) f_{T_1}(s) ds` for every `x` column.
///
/// `f_prev[k][j]` is `F_{n-1}(x_j, t_k)` on a uniform time grid starting at 0;
/// `f_t1[k]` is the first-jump density at `t_k`.
pub fn convolve_subdensity(
    f_prev: &[Vec<f64>],
    f_t1: &[f64],
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_uniform(t_grid)?;
    if f_prev.len() != t_grid.len() || f_t1.len() != t_grid.len() {
        return Err(Error::invalid(
            "sub-CDF and jump density must be sampled on the time grid",
        ));
    }
    if f_t1.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("first-jump density must be nonnegative"));
    }
    let nx = f_prev[0].len();
    if f_prev.iter().any(|row| row.len() != nx) {
        return Err(Error::invalid("sub-CDF rows have different x-grids"));
    }
    let mut out = vec![vec![0.0; nx]; t_grid.len()];
    for j in 0..nx {
        let col: Vec<f64> = f_prev.iter().map(|row| row[j]).collect();
        for (k, v) in convolve_time(&col, f_t1, t_grid)?.into_iter().enumerate() {
            out[k][j] = v;
        }
    }
    Ok(out)
}

/// `F_{T_n}` on the grid by `n - 1` convolutions of `F_{T_1}` with `f_{T_1}`.
pub fn nth_jump_cdf(f_t1: &[f64], t_grid: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(vec![1.0; t_grid.len()]);
    }
    let mut cdf = convolve_time(&vec![1.0; t_grid.len()], f_t1, t_grid)?;
    for _ in 1..n {
        cdf = convolve_time(&cdf, f_t1, t_grid)?;
    }
    Ok(cdf)
}
