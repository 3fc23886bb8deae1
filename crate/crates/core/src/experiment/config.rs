//! Line-oriented `key = value` experiment configuration.
//!
//! `#` starts a comment. Unknown keys are rejected; omitted keys keep their
//! defaults. Lists are comma separated, integer ranges are written `lo..hi`
//! (inclusive).

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fp::{InitialDatum, SolverConfig, SolverMode};
use crate::model::{DischargeSpec, RateKind};
use crate::sim::PathKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Convergence,
    SelfSimilar,
    Validate,
    Simulate,
    Solve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::SelfSimilar => "selfsim",
            Experiment::Validate => "validate",
            Experiment::Simulate => "simulate",
            Experiment::Solve => "solve",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Experiment::Convergence,
            Experiment::SelfSimilar,
            Experiment::Validate,
            Experiment::Simulate,
            Experiment::Solve,
        ]
        .into_iter()
        .find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Connectivities swept by the convergence and self-similar studies.
    pub b_values: Vec<f64>,
    /// `δ = 2^{-k}` for `k` in this range.
    pub k_range: RangeInclusive<i32>,
    /// Range of `k` used by the power-law and self-similar fits.
    pub fit_k: RangeInclusive<i32>,
    pub rate_kind: RateKind,
    pub a: f64,
    pub n_cells: usize,
    pub tau: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// Mean and variance of the Gaussian initial datum.
    pub x0: f64,
    pub sigma0_sq: f64,
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    /// Regularization and connectivity of the single-run commands.
    pub delta: f64,
    pub b: f64,
    pub mode: SolverMode,
    pub process: PathKind,
    pub bin_width: f64,
    pub sample_dt: f64,
    /// Relative level that bounds the profile-collapse window.
    pub collapse_level: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Convergence,
            b_values: vec![1.0, 0.5, 0.0, -0.5, -1.0],
            k_range: 0..=7,
            fit_k: 4..=7,
            rate_kind: RateKind::Step,
            a: 1.0,
            n_cells: 1024,
            tau: 1e-3,
            t_max: 1.0,
            x_min: -4.0,
            x_max: 4.0,
            x0: -1.0,
            sigma0_sq: 0.01,
            paths: 100_000,
            dt: 1e-3,
            seed: 20_240_601,
            delta: 0.125,
            b: 0.0,
            mode: SolverMode::DischargeFull,
            process: PathKind::Discharge,
            bin_width: 0.02,
            sample_dt: 0.25,
            collapse_level: 0.1,
            out: PathBuf::from("out"),
        }
    }
}

fn bad(key: &str, msg: impl Into<String>) -> Error {
    Error::InvalidValue {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| bad(key, format!("cannot parse `{}`", v.trim())))
}

fn range(key: &str, v: &str) -> Result<RangeInclusive<i32>> {
    let (lo, hi) = v
        .split_once("..")
        .ok_or_else(|| bad(key, format!("expected `lo..hi`, got `{}`", v.trim())))?;
    Ok(num::<i32>(key, lo)?..=num::<i32>(key, hi)?)
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num(key, s))
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { line: i + 1, msg },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => {
                self.experiment = Experiment::parse(v)
                    .ok_or_else(|| bad(key, format!("unknown experiment `{v}`")))?
            }
            "b_values" => self.b_values = list(key, v)?,
            "k_range" => self.k_range = range(key, v)?,
            "fit_k" => self.fit_k = range(key, v)?,
            "rate_kind" => {
                self.rate_kind =
                    RateKind::parse(v).ok_or_else(|| bad(key, format!("unknown rate `{v}`")))?
            }
            "a" => self.a = num(key, v)?,
            "n_cells" => self.n_cells = num(key, v)?,
            "tau" => self.tau = num(key, v)?,
            "t_max" => self.t_max = num(key, v)?,
            "x_min" => self.x_min = num(key, v)?,
            "x_max" => self.x_max = num(key, v)?,
            "x0" => self.x0 = num(key, v)?,
            "sigma0_sq" => self.sigma0_sq = num(key, v)?,
            "paths" => self.paths = num(key, v)?,
            "dt" => self.dt = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "delta" => self.delta = num(key, v)?,
            "b" => self.b = num(key, v)?,
            "mode" => {
                self.mode =
                    SolverMode::parse(v).ok_or_else(|| bad(key, format!("unknown mode `{v}`")))?
            }
            "process" => {
                self.process =
                    PathKind::parse(v).ok_or_else(|| bad(key, format!("unknown process `{v}`")))?
            }
            "bin_width" => self.bin_width = num(key, v)?,
            "sample_dt" => self.sample_dt = num(key, v)?,
            "collapse_level" => self.collapse_level = num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            _ => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unknown key `{key}`"),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(key, format!("must be positive, got {v}")))
            }
        };
        positive("t_max", self.t_max)?;
        positive("tau", self.tau)?;
        positive("dt", self.dt)?;
        positive("a", self.a)?;
        positive("sigma0_sq", self.sigma0_sq)?;
        positive("delta", self.delta)?;
        positive("bin_width", self.bin_width)?;
        positive("sample_dt", self.sample_dt)?;
        if self.k_range.is_empty() {
            return Err(bad("k_range", "must be nonempty"));
        }
        if self.fit_k.end() - self.fit_k.start() < 1 {
            return Err(bad("fit_k", "needs at least two values of k"));
        }
        if self.b_values.is_empty() || self.b_values.iter().any(|b| !b.is_finite()) {
            return Err(bad("b_values", "must be a nonempty list of finite numbers"));
        }
        if self.paths < 1 {
            return Err(bad("paths", "must be at least 1"));
        }
        if self.n_cells < 16 {
            return Err(bad("n_cells", "must be at least 16"));
        }
        if !(self.x_min < 0.0 && self.x_max > 1.0) {
            return Err(bad("x_min", "domain must contain [0, 1]"));
        }
        if !(self.collapse_level > 0.0 && self.collapse_level < 1.0) {
            return Err(bad("collapse_level", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Canonical text form; parses back to an equal config.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let join = |v: &[f64]| {
            v.iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(s, "experiment = {}", self.experiment.name());
        let _ = writeln!(s, "b_values = {}", join(&self.b_values));
        let _ = writeln!(
            s,
            "k_range = {}..{}",
            self.k_range.start(),
            self.k_range.end()
        );
        let _ = writeln!(s, "fit_k = {}..{}", self.fit_k.start(), self.fit_k.end());
        let _ = writeln!(s, "rate_kind = {}", self.rate_kind.name());
        let _ = writeln!(s, "a = {}", self.a);
        let _ = writeln!(s, "n_cells = {}", self.n_cells);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "t_max = {}", self.t_max);
        let _ = writeln!(s, "x_min = {}", self.x_min);
        let _ = writeln!(s, "x_max = {}", self.x_max);
        let _ = writeln!(s, "x0 = {}", self.x0);
        let _ = writeln!(s, "sigma0_sq = {}", self.sigma0_sq);
        let _ = writeln!(s, "paths = {}", self.paths);
        let _ = writeln!(s, "dt = {}", self.dt);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "b = {}", self.b);
        let _ = writeln!(s, "mode = {}", self.mode.name());
        let _ = writeln!(s, "process = {}", self.process.name());
        let _ = writeln!(s, "bin_width = {}", self.bin_width);
        let _ = writeln!(s, "sample_dt = {}", self.sample_dt);
        let _ = writeln!(s, "collapse_level = {}", self.collapse_level);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }

    pub fn deltas(&self) -> Vec<(i32, f64)> {
        self.k_range.clone().map(|k| (k, 0.5f64.powi(k))).collect()
    }

    pub fn spec(&self, delta: f64, b: f64) -> DischargeSpec {
        DischargeSpec {
            delta,
            rate_kind: self.rate_kind,
            b,
            a: self.a,
            x0: self.x0,
        }
    }

    pub fn solver(&self, spec: DischargeSpec, mode: SolverMode) -> SolverConfig {
        SolverConfig {
            spec,
            mode,
            x_min: self.x_min,
            x_max: self.x_max,
            n_cells: self.n_cells,
            tau: self.tau,
            t_max: self.t_max,
            initial: InitialDatum::Gaussian {
                mean: self.x0,
                variance: self.sigma0_sq,
            },
            snapshot_times: Vec::new(),
        }
    }
}

/// [`ExperimentConfig::parse`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::parse(text)
}
