//! Self-similar description of the density above threshold:
//! `f^δ(x) ≈ δ^α ψ(δ^β (x - 1))` for `x ≥ 1`.
//!
//! `α` is the log–log slope of `sup_{x≥1} f^δ`; the width
//! `w(δ) = ∫_{x≥1} f^δ dx / sup f^δ` scales like `δ^{-β}`.

use crate::error::{Error, Result};
use crate::model::THRESHOLD;
use crate::table::CsvTable;

use super::fit::linear_fit;

/// `f^δ` sampled on increasing nodes `x ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRestriction {
    pub delta: f64,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl ThresholdRestriction {
    pub fn new(delta: f64, x: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if x.len() != f.len() || x.len() < 2 {
            return Err(Error::invalid(
                "restriction needs at least two matching samples",
            ));
        }
        if x[0] < THRESHOLD - 1e-12 || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "restriction nodes must be increasing and lie in x ≥ 1",
            ));
        }
        if !(delta > 0.0) {
            return Err(Error::invalid("delta must be positive"));
        }
        Ok(Self { delta, x, f })
    }

    pub fn sup(&self) -> f64 {
        self.f.iter().copied().fold(0.0, f64::max)
    }

    pub fn integral(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.f.windows(2))
            .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
            .sum()
    }
}

/// Rescaled samples `(z, ψ)` of one `δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub delta: f64,
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarFit {
    pub alpha: f64,
    pub beta: f64,
    pub profiles: Vec<Profile>,
    pub collapse_error: f64,
    /// RMS residuals of the two log–log regressions.
    pub residual_alpha: f64,
    pub residual_beta: f64,
}

impl SelfSimilarFit {
    /// `delta,z,psi`.
    pub fn profile_csv(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(["delta", "z", "psi"]);
        for p in &self.profiles {
            for (&z, &psi) in p.z.iter().zip(&p.psi) {
                t.push(vec![p.delta.into(), z.into(), psi.into()])?;
            }
        }
        Ok(t)
    }
}

/// Where profiles are compared: all `z` in the common range at which every
/// profile stays above `level` times its own maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseWindow {
    pub level: f64,
    pub n_points: usize,
}

impl Default for CollapseWindow {
    fn default() -> Self {
        Self {
            level: 0.1,
            n_points: 200,
        }
    }
}

/// `ψ(z) = δ^{-α} f^δ(1 + δ^{-β} z)` at the restriction's nodes.
pub fn extract_profile(r: &ThresholdRestriction, alpha: f64, beta: f64) -> Profile {
    let scale_f = r.delta.powf(-alpha);
    let scale_z = r.delta.powf(beta);
    Profile {
        delta: r.delta,
        z: r.x
            .iter()
            .map(|&x| ((x - THRESHOLD) * scale_z).max(0.0))
            .collect(),
        psi: r.f.iter().map(|&f| f * scale_f).collect(),
    }
}

fn interp(z: &[f64], v: &[f64], at: f64) -> f64 {
    let k = z.partition_point(|&s| s <= at);
    if k == 0 {
        return v[0];
    }
    if k >= z.len() {
        return v[z.len() - 1];
    }
    let w = (at - z[k - 1]) / (z[k] - z[k - 1]);
    v[k - 1] * (1.0 - w) + v[k] * w
}

/// Largest `z` up to which the profile stays at or above `level · max ψ`.
fn window_end(p: &Profile, level: f64) -> f64 {
    let top = p.psi.iter().copied().fold(0.0, f64::max);
    let thresh = level * top;
    let imax = p.psi.iter().position(|&v| v == top).unwrap_or(0);
    let mut end = p.z[imax];
    for k in imax..p.z.len() {
        if p.psi[k] < thresh {
            break;
        }
        end = p.z[k];
    }
    end
}

/// `max_z (max_δ ψ - min_δ ψ) / max_δ ψ` over the common window.
pub fn profile_collapse_error(profiles: &[Profile], window: CollapseWindow) -> Result<f64> {
    if profiles.len() <= 1 {
        return Ok(0.0);
    }
    if profiles
        .iter()
        .any(|p| p.z.len() < 2 || p.z.len() != p.psi.len())
    {
        return Err(Error::invalid("profile with fewer than two samples"));
    }
    let lo = profiles
        .iter()
        .map(|p| p.z[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = profiles
        .iter()
        .map(|p| window_end(p, window.level))
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::invalid(format!(
            "profiles have no overlapping z-window ([{lo}, {hi}])"
        )));
    }
    let n = window.n_points.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let z = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let vals = profiles.iter().map(|p| interp(&p.z, &p.psi, z));
        let (mn, mx) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if mx > 0.0 {
            worst = worst.max((mx - mn) / mx);
        }
    }
    Ok(worst)
}

/// Fits `(α, β)` from a family of restrictions (at least three `δ`) and
/// measures how well the rescaled profiles collapse.
pub fn fit_self_similar(
    family: &[ThresholdRestriction],
    window: CollapseWindow,
) -> Result<SelfSimilarFit> {
    if family.len() < 3 {
        return Err(Error::invalid(
            "self-similar fit needs at least three values of delta",
        ));
    }
    let mut logd = Vec::with_capacity(family.len());
    let mut logs = Vec::with_capacity(family.len());
    let mut logw = Vec::with_capacity(family.len());
    for r in family {
        let sup = r.sup();
        if !(sup > 0.0) {
            return Err(Error::invalid(format!(
                "restriction for delta {} vanishes",
                r.delta
            )));
        }
        logd.push(r.delta.ln());
        logs.push(sup.ln());
        logw.push((r.integral() / sup).ln());
    }
    let (alpha, _, residual_alpha) = linear_fit(&logd, &logs)?;
    let (wslope, _, residual_beta) = linear_fit(&logd, &logw)?;
    let beta = -wslope;
    let profiles: Vec<Profile> = family
        .iter()
        .map(|r| extract_profile(r, alpha, beta))
        .collect();
    let collapse_error = profile_collapse_error(&profiles, window)?;
    Ok(SelfSimilarFit {
        alpha,
        beta,
        profiles,
        collapse_error,
        residual_alpha,
        residual_beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn synthetic(delta: f64, alpha: f64, beta: f64) -> ThresholdRestriction {
        let n = 100_001;
        let x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 20.0 * i as f64 / (n - 1) as f64)
            .collect();
        let f = x
            .iter()
            .map(|&x| delta.powf(alpha) * (-(delta.powf(beta)) * (x - 1.0)).exp())
            .collect();
        ThresholdRestriction::new(delta, x, f).unwrap()
    }

    #[test]
    fn recovers_synthetic_ansatz() {
        let fam: Vec<_> = (4..8)
            .map(|k| synthetic(0.5f64.powi(k), 0.3, -0.4))
            .collect();
        let fit = fit_self_similar(&fam, CollapseWindow::default()).unwrap();
        assert!((fit.alpha - 0.3).abs() < 1e-3, "alpha {}", fit.alpha);
        assert!((fit.beta + 0.4).abs() < 1e-3, "beta {}", fit.beta);
        assert!(fit.profiles.iter().all(|p| p.z.iter().all(|&z| z >= 0.0)));
    }

    #[test]
    fn exact_profiles_collapse() {
        let fam: Vec<_> = (2..7)
            .map(|k| synthetic(0.5f64.powi(k), 0.3, -0.4))
            .collect();
        let profiles: Vec<_> = fam.iter().map(|r| extract_profile(r, 0.3, -0.4)).collect();
        let e = profile_collapse_error(&profiles, CollapseWindow::default()).unwrap();
        assert!(e <= 1e-6, "collapse {e}");
        assert_eq!(
            profile_collapse_error(&profiles[..1], CollapseWindow::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn subset_invariance() {
        let fam: Vec<_> = (1..8)
            .map(|k| synthetic(0.5f64.powi(k), 0.3, -0.4))
            .collect();
        for start in 0..=4 {
            let fit = fit_self_similar(&fam[start..start + 3], CollapseWindow::default()).unwrap();
            assert!((fit.alpha - 0.3).abs() < 1e-3 && (fit.beta + 0.4).abs() < 1e-3);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let mut fam: Vec<_> = (4..7)
            .map(|k| synthetic(0.5f64.powi(k), 0.3, -0.4))
            .collect();
        assert!(fit_self_similar(&fam[..2], CollapseWindow::default()).is_err());
        fam[1].f.iter_mut().for_each(|v| *v = 0.0);
        assert!(fit_self_similar(&fam, CollapseWindow::default()).is_err());
        let a = Profile {
            delta: 0.5,
            z: vec![0.0, 1.0],
            psi: vec![1.0, 0.5],
        };
        let b = Profile {
            delta: 0.25,
            z: vec![2.0, 3.0],
            psi: vec![1.0, 0.5],
        };
        assert!(profile_collapse_error(&[a, b], CollapseWindow::default()).is_err());
    }
}
