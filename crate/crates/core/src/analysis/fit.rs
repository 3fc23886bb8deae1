//! Power-law fits `D(δ) ≈ A δ^R` by least squares in log–log space.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::table::{Cell, CsvTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Exponent `R` (slope in log–log space).
    pub rate: f64,
    /// `A = exp(intercept)`.
    pub prefactor: f64,
    /// RMS residual of the log-space fit.
    pub residual: f64,
}

/// Ordinary least squares line through `(xs, ys)`: `(slope, intercept, rms residual)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid(
            "a line fit needs at least two paired points",
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("abscissae are all equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok((slope, intercept, (ss / n).sqrt()))
}

/// Fits `values ≈ A δ^R` over the index `window`.
pub fn fit_power_law(deltas: &[f64], values: &[f64], window: Range<usize>) -> Result<PowerLawFit> {
    if deltas.len() != values.len() {
        return Err(Error::invalid("deltas and values differ in length"));
    }
    if window.end > deltas.len() || window.len() < 2 {
        return Err(Error::invalid(format!(
            "fit window {window:?} invalid for {} points",
            deltas.len()
        )));
    }
    let mut xs = Vec::with_capacity(window.len());
    let mut ys = Vec::with_capacity(window.len());
    for i in window {
        if !(values[i] > 0.0) || !(deltas[i] > 0.0) {
            return Err(Error::invalid(format!(
                "nonpositive entry in fit window at index {i} (delta {}, value {})",
                deltas[i], values[i]
            )));
        }
        xs.push(deltas[i].ln());
        ys.push(values[i].ln());
    }
    let (rate, intercept, residual) = linear_fit(&xs, &ys)?;
    Ok(PowerLawFit {
        rate,
        prefactor: intercept.exp(),
        residual,
    })
}

/// Discrepancies over `δ = 2^{-k}` and their power-law fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub deltas: Vec<f64>,
    pub discrepancies: Vec<f64>,
    pub fit_window: Range<usize>,
    pub fit: PowerLawFit,
}

impl ConvergenceReport {
    pub fn new(
        deltas: Vec<f64>,
        discrepancies: Vec<f64>,
        fit_window: Range<usize>,
    ) -> Result<Self> {
        if deltas.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::invalid("deltas must be strictly decreasing"));
        }
        if discrepancies.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::invalid("discrepancies must be nonnegative"));
        }
        let fit = fit_power_law(&deltas, &discrepancies, fit_window.clone())?;
        Ok(Self {
            deltas,
            discrepancies,
            fit_window,
            fit,
        })
    }

    /// `delta,D,in_fit_window`.
    pub fn to_csv(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(["delta", "D", "in_fit_window"]);
        for (i, (&d, &v)) in self.deltas.iter().zip(&self.discrepancies).enumerate() {
            t.push(vec![
                d.into(),
                v.into(),
                Cell::from(self.fit_window.contains(&i)),
            ])?;
        }
        Ok(t)
    }
}
