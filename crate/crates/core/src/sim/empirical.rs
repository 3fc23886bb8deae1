//! Estimators over path ensembles: empirical CDFs, sub-CDFs split by jump
//! count, jump-time histograms and binned firing rates.

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::path::PathRecord;

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub sorted_samples: Vec<f64>,
    pub n: usize,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("empirical CDF of an empty sample"));
        }
        if samples.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("NaN in sample"));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        Ok(Self {
            sorted_samples: samples,
            n,
        })
    }

    pub fn count_le(&self, x: f64) -> usize {
        self.sorted_samples.partition_point(|&s| s <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.n as f64
    }
}

pub fn empirical_cdf(samples: Vec<f64>) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(samples)
}

fn ensure_nonempty(paths: &[PathRecord]) -> Result<()> {
    if paths.is_empty() {
        Err(Error::invalid("no paths"))
    } else {
        Ok(())
    }
}

/// States at sample instant `t` of every record that reached it.
pub fn states_at(paths: &[PathRecord], t: f64) -> Vec<f64> {
    paths.iter().filter_map(|p| p.state_at(t)).collect()
}

/// Number of paths with `X_t ≤ x` and exactly `n` firings by `t`.
pub fn sub_cdf_count(paths: &[PathRecord], n: usize, x: f64, t: f64) -> Result<usize> {
    ensure_nonempty(paths)?;
    let mut count = 0;
    for p in paths {
        if p.jump_count_at(t) != n {
            continue;
        }
        match p.state_at(t) {
            Some(s) if s <= x => count += 1,
            Some(_) => {}
            None if p.end_time < t => {}
            None => return Err(Error::invalid(format!("t = {t} is not a sample instant"))),
        }
    }
    Ok(count)
}

/// Estimate of `F_n(x, t) = P(X_t ≤ x, n_t = n)`.
pub fn empirical_sub_cdf(paths: &[PathRecord], n: usize, x: f64, t: f64) -> Result<f64> {
    Ok(sub_cdf_count(paths, n, x, t)? as f64 / paths.len() as f64)
}

/// Fixed-width histogram on `[0, n_bins · bin_width]`, normalized so that
/// `Σ density · bin_width` is the empirical probability of the event.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub density: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_paths: usize,
}

impl Histogram {
    fn from_counts(counts: Vec<u64>, bin_width: f64, n_paths: usize) -> Self {
        let norm = 1.0 / (n_paths as f64 * bin_width);
        let density = counts.iter().map(|&c| c as f64 * norm).collect();
        Self {
            bin_width,
            density,
            counts,
            n_paths,
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.density.len())
            .map(|b| (b as f64 + 0.5) * self.bin_width)
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.n_paths as f64
    }

    /// Associative merge of two histograms over disjoint path sets.
    pub fn merge(&self, other: &Histogram) -> Result<Histogram> {
        if self.bin_width != other.bin_width || self.counts.len() != other.counts.len() {
            return Err(Error::invalid("histograms have different bins"));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Histogram::from_counts(
            counts,
            self.bin_width,
            self.n_paths + other.n_paths,
        ))
    }
}

fn check_bins(paths: &[PathRecord], bin_width: f64, t_max: f64) -> Result<usize> {
    ensure_nonempty(paths)?;
    if !(bin_width > 0.0) || !(t_max > 0.0) {
        return Err(Error::invalid("bin width and horizon must be positive"));
    }
    Ok((t_max / bin_width - 1e-9).ceil() as usize)
}

fn bin_of(t: f64, bin_width: f64, n_bins: usize) -> Option<usize> {
    if t < 0.0 {
        return None;
    }
    let b = (t / bin_width) as usize;
    (b < n_bins).then_some(b)
}

/// Histogram density of `T_n` on `[0, t_max]`.
pub fn empirical_jump_time_density(
    paths: &[PathRecord],
    n: usize,
    bin_width: f64,
    t_max: f64,
) -> Result<Histogram> {
    let n_bins = check_bins(paths, bin_width, t_max)?;
    if n == 0 {
        return Err(Error::invalid("jump index is 1-based"));
    }
    let counts = paths
        .par_iter()
        .fold(
            || vec![0u64; n_bins],
            |mut acc, p| {
                if let Some(b) = p.nth_jump(n).and_then(|t| bin_of(t, bin_width, n_bins)) {
                    acc[b] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n_bins],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    Ok(Histogram::from_counts(counts, bin_width, paths.len()))
}

/// Binned mean firing rate `N̂ = (firings in bin) / (paths · bin_width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiringEstimate {
    pub bin_width: f64,
    pub t_bin: Vec<f64>,
    pub rate: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn empirical_firing_rate(
    paths: &[PathRecord],
    bin_width: f64,
    t_max: f64,
) -> Result<FiringEstimate> {
    let n_bins = check_bins(paths, bin_width, t_max)?;
    // (Σ c, Σ c²) of per-path counts
    let (s1, s2) = paths
        .par_iter()
        .fold(
            || (vec![0u64; n_bins], vec![0u64; n_bins]),
            |(mut s1, mut s2), p| {
                let mut k = 0;
                while k < p.jump_times.len() {
                    let b = bin_of(p.jump_times[k], bin_width, n_bins);
                    let mut c = 0u64;
                    while k < p.jump_times.len() && bin_of(p.jump_times[k], bin_width, n_bins) == b
                    {
                        c += 1;
                        k += 1;
                    }
                    if let Some(b) = b {
                        s1[b] += c;
                        s2[b] += c * c;
                    }
                }
                (s1, s2)
            },
        )
        .reduce(
            || (vec![0u64; n_bins], vec![0u64; n_bins]),
            |a, b| {
                (
                    a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect(),
                    a.1.iter().zip(&b.1).map(|(x, y)| x + y).collect(),
                )
            },
        );
    let n = paths.len() as f64;
    let rate = s1.iter().map(|&c| c as f64 / (n * bin_width)).collect();
    let stderr = s1
        .iter()
        .zip(&s2)
        .map(|(&a, &b)| {
            let mean = a as f64 / n;
            let var = (b as f64 / n - mean * mean).max(0.0);
            (var / n).sqrt() / bin_width
        })
        .collect();
    Ok(FiringEstimate {
        bin_width,
        t_bin: (0..n_bins).map(|b| b as f64 * bin_width).collect(),
        rate,
        stderr,
    })
}

/// Mean and standard error of `n_t` over the ensemble.
pub fn mean_jump_count(paths: &[PathRecord], t: f64) -> Result<(f64, f64)> {
    ensure_nonempty(paths)?;
    let n = paths.len() as f64;
    let (s1, s2) = paths.iter().fold((0.0, 0.0), |(a, b), p| {
        let c = p.jump_count_at(t) as f64;
        (a + c, b + c * c)
    });
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Fraction of paths with no firing in `[0, t]`.
pub fn survival(paths: &[PathRecord], t: f64) -> Result<f64> {
    ensure_nonempty(paths)?;
    Ok(paths.iter().filter(|p| p.jump_count_at(t) == 0).count() as f64 / paths.len() as f64)
}

/// Fraction of paths with `T_n ≤ t`.
pub fn jump_probability(paths: &[PathRecord], n: usize, t: f64) -> Result<f64> {
    ensure_nonempty(paths)?;
    Ok(paths.iter().filter(|p| p.jump_count_at(t) >= n).count() as f64 / paths.len() as f64)
}
