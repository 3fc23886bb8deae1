//! Semi-implicit Scharfetter–Gummel discretization of the Fokker–Planck
//! equations in logistic coordinates.
//!
//! Each step solves for `u_j = q_j / M_j` with the Maxwellian `M` frozen at
//! the explicit firing rate, so the implicit operator is a symmetric,
//! strictly diagonally dominant tridiagonal matrix for any `tau > 0`.
//! Fluxes at half nodes are `a M(g_L(y_{j+1/2})) / (g_L'(y_{j+1/2}) Δy)
//! · (u_{j+1} - u_j)`; they vanish identically on the discrete Maxwellian.

use crate::error::{Error, Result};
use crate::model::{DischargeSpec, THRESHOLD};

use super::grid::{build_logistic_grid, inverse_logistic, logistic, metric, LogisticGrid};
use super::tridiag::{thomas_solve, Tridiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverMode {
    /// Random discharge with reinjection at the reset point.
    DischargeFull,
    /// Random discharge, stopped at the first discharge (no source).
    DischargeKilled,
    /// Absorbing threshold with reinjection of the boundary flux.
    HardWallFull,
    /// Absorbing threshold, no reinjection.
    HardWallKilled,
}

impl SolverMode {
    pub const ALL: [SolverMode; 4] = [
        SolverMode::DischargeFull,
        SolverMode::DischargeKilled,
        SolverMode::HardWallFull,
        SolverMode::HardWallKilled,
    ];

    pub fn is_hard_wall(self) -> bool {
        matches!(self, SolverMode::HardWallFull | SolverMode::HardWallKilled)
    }

    pub fn reinjects(self) -> bool {
        matches!(self, SolverMode::DischargeFull | SolverMode::HardWallFull)
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverMode::DischargeFull => "discharge",
            SolverMode::DischargeKilled => "discharge-killed",
            SolverMode::HardWallFull => "hard-wall",
            SolverMode::HardWallKilled => "hard-wall-killed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        SolverMode::ALL.into_iter().find(|m| m.name() == s.trim())
    }
}

/// Initial density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDatum {
    Gaussian {
        mean: f64,
        variance: f64,
    },
    /// Unit mass on the grid node nearest to `x`.
    PointMass {
        x: f64,
    },
}

impl Default for InitialDatum {
    fn default() -> Self {
        InitialDatum::Gaussian {
            mean: -1.0,
            variance: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub spec: DischargeSpec,
    pub mode: SolverMode,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub tau: f64,
    pub t_max: f64,
    pub initial: InitialDatum,
    /// Extra instants at which density snapshots are kept; `t_max` is always kept.
    pub snapshot_times: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            spec: DischargeSpec::default(),
            mode: SolverMode::DischargeFull,
            x_min: -4.0,
            x_max: 4.0,
            n_cells: 1024,
            tau: 1e-3,
            t_max: 1.0,
            initial: InitialDatum::default(),
            snapshot_times: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mut self, mode: SolverMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_spec(mut self, spec: DischargeSpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::invalid(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.n_cells < 16 {
            return Err(Error::invalid(format!(
                "n_cells must be at least 16, got {}",
                self.n_cells
            )));
        }
        if let InitialDatum::Gaussian { variance, mean } = self.initial {
            if !(variance > 0.0) || !mean.is_finite() {
                return Err(Error::invalid(
                    "initial Gaussian needs a finite mean and positive variance",
                ));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.tau).round().max(1.0) as usize
    }
}

/// Grid density `q_j = f(g_L(y_j), t)` plus the firing rates emitted so far.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    pub q: Vec<f64>,
    pub t: f64,
    pub step: usize,
    pub firing_history: Vec<(f64, f64)>,
}

/// Sampled firing rate `N(t_m)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FiringSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Steps whose raw rate came out negative and was clamped to zero
    /// before entering the scheme. `values` keeps the raw numbers.
    pub clamped: Vec<usize>,
}

impl FiringSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Piecewise-linear interpolation, constant beyond the ends.
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 0 {
            return 0.0;
        }
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }

    /// Trapezoid integral of `N` over the series' time span.
    pub fn integral(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum()
    }
}

/// Weight `M(x) = exp(-(x - b N)² / (2a))` of the Scharfetter–Gummel form.
#[inline]
pub fn maxwellian(x: f64, n_prev: f64, spec: &DischargeSpec) -> f64 {
    let c = x - spec.b * n_prev;
    (-c * c / (2.0 * spec.a)).exp()
}

/// `h Σ_j g_L'(y_j) λ(g_L(y_j)) q_j` over the full grid.
pub fn firing_rate_quadrature(q: &[f64], grid: &LogisticGrid, spec: &DischargeSpec) -> f64 {
    grid.y_nodes
        .iter()
        .zip(&grid.x_nodes)
        .zip(q)
        .map(|((&y, &x), &qj)| metric(y) * spec.rate(x) * qj)
        .sum::<f64>()
        * grid.h
}

/// Node geometry of one problem: positions in `y` with Dirichlet ends,
/// control volumes, and half-node data.
#[derive(Debug, Clone)]
struct NodeSet {
    pos: Vec<f64>,
    x: Vec<f64>,
    metric: Vec<f64>,
    volume: Vec<f64>,
    rate: Vec<f64>,
    half_x: Vec<f64>,
    /// `1 / (g_L'(y_{i+1/2}) (y_{i+1} - y_i))`.
    half_base: Vec<f64>,
}

impl NodeSet {
    fn new(pos: Vec<f64>, spec: &DischargeSpec, with_rate: bool) -> Self {
        let k = pos.len();
        let x: Vec<f64> = pos.iter().map(|&y| inverse_logistic(y)).collect();
        let metric_v: Vec<f64> = pos.iter().map(|&y| metric(y)).collect();
        let mut volume = vec![0.0; k];
        for i in 1..k - 1 {
            volume[i] = 0.5 * (pos[i + 1] - pos[i - 1]);
        }
        let rate = x
            .iter()
            .map(|&xi| if with_rate { spec.rate(xi) } else { 0.0 })
            .collect();
        let (half_x, half_base) = pos
            .windows(2)
            .map(|w| {
                let ym = 0.5 * (w[0] + w[1]);
                (inverse_logistic(ym), 1.0 / (metric(ym) * (w[1] - w[0])))
            })
            .unzip();
        Self {
            pos,
            x,
            metric: metric_v,
            volume,
            rate,
            half_x,
            half_base,
        }
    }

    fn len(&self) -> usize {
        self.pos.len()
    }
}

/// Discretization of one [`SolverConfig`].
#[derive(Debug, Clone)]
pub struct SgScheme {
    pub grid: LogisticGrid,
    pub config: SolverConfig,
    nodes: NodeSet,
}

impl SgScheme {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = build_logistic_grid(config.x_min, config.x_max, config.n_cells)?;
        let nodes = if config.mode.is_hard_wall() {
            NodeSet::new(grid.wall_positions(), &config.spec, false)
        } else {
            NodeSet::new(grid.y_nodes.clone(), &config.spec, true)
        };
        Ok(Self {
            grid,
            config,
            nodes,
        })
    }

    /// Unknown-carrying node indices `1..last`; the first and last nodes hold `q = 0`.
    fn last(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn initial_state(&self) -> DensityState {
        let n = self.grid.len();
        let mut q = vec![0.0; n];
        let last = self.last();
        match self.config.initial {
            InitialDatum::Gaussian { mean, variance } => {
                let norm = 1.0 / (2.0 * std::f64::consts::PI * variance).sqrt();
                for (j, qj) in q.iter_mut().enumerate().take(last).skip(1) {
                    let d = self.grid.x_nodes[j] - mean;
                    *qj = norm * (-d * d / (2.0 * variance)).exp();
                }
            }
            InitialDatum::PointMass { x } => {
                let y = logistic(x);
                let j = self
                    .nodes
                    .pos
                    .iter()
                    .take(last)
                    .skip(1)
                    .enumerate()
                    .min_by(|a, b| (a.1 - y).abs().total_cmp(&(b.1 - y).abs()))
                    .map(|(i, _)| i + 1)
                    .unwrap_or(1);
                q[j] = 1.0 / (self.nodes.volume[j] * self.nodes.metric[j]);
            }
        }
        DensityState {
            q,
            t: 0.0,
            step: 0,
            firing_history: Vec::new(),
        }
    }

    /// Mass `Σ V_j g_L'(y_j) q_j` over the mode's node set.
    pub fn total_mass(&self, state: &DensityState) -> f64 {
        (1..self.last())
            .map(|i| self.nodes.volume[i] * self.nodes.metric[i] * state.q[i])
            .sum()
    }

    /// Raw (unclamped) explicit firing rate of `state`.
    pub fn firing_rate(&self, state: &DensityState) -> f64 {
        if self.config.mode.is_hard_wall() {
            self.boundary_flux(&state.q)
        } else {
            (1..self.last())
                .map(|i| {
                    self.nodes.volume[i] * self.nodes.metric[i] * self.nodes.rate[i] * state.q[i]
                })
                .sum()
        }
    }

    /// `-a ∂_x f(1⁻)` from the quadratic through `(1, 0)` and the two nodes
    /// below the wall, in physical coordinates.
    fn boundary_flux(&self, q: &[f64]) -> f64 {
        let j1 = self.last() - 1;
        let j2 = j1 - 1;
        let d1 = self.nodes.x[j1] - THRESHOLD;
        let d2 = self.nodes.x[j2] - THRESHOLD;
        let l1 = -d2 / (d1 * (d1 - d2));
        let l2 = -d1 / (d2 * (d2 - d1));
        -self.config.spec.a * (q[j1] * l1 + q[j2] * l2)
    }

    fn maxwellians(&self, n_prev: f64) -> (Vec<f64>, Vec<f64>) {
        let spec = &self.config.spec;
        let m = self
            .nodes
            .x
            .iter()
            .map(|&x| maxwellian(x, n_prev, spec))
            .collect();
        let mh = self
            .nodes
            .half_x
            .iter()
            .map(|&x| maxwellian(x, n_prev, spec))
            .collect();
        (m, mh)
    }

    /// Discrete fluxes `a M_{i+1/2}/(g' Δy) (q_{i+1}/M_{i+1} - q_i/M_i)` at every half node.
    pub fn half_node_fluxes(&self, q: &[f64], n_prev: f64) -> Vec<f64> {
        let (m, mh) = self.maxwellians(n_prev);
        let a = self.config.spec.a;
        (0..self.last())
            .map(|i| {
                let qn = if i + 1 == self.last() { 0.0 } else { q[i + 1] };
                a * mh[i] * self.nodes.half_base[i] * (qn / m[i + 1] - q[i] / m[i])
            })
            .collect()
    }

    /// Discrete Maxwellian on the mode's node set (zero on the Dirichlet nodes).
    pub fn discrete_maxwellian(&self, n_prev: f64) -> Vec<f64> {
        let (m, _) = self.maxwellians(n_prev);
        let mut q = vec![0.0; self.grid.len()];
        q[1..self.last()].copy_from_slice(&m[1..self.last()]);
        q
    }

    /// Implicit system for `u_i = q_i^{m+1} / M_i`, `i = 1..last-1`, with the
    /// firing rate `n_prev` frozen in the weights and in the reset source.
    pub fn assemble(&self, state: &DensityState, n_prev: f64) -> Result<Tridiagonal> {
        if !n_prev.is_finite() || state.q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Assembly("non-finite density or firing rate".into()));
        }
        if state.q.len() != self.grid.len() {
            return Err(Error::Assembly(
                "density length does not match the grid".into(),
            ));
        }
        let tau = self.config.tau;
        let a = self.config.spec.a;
        let (m, mh) = self.maxwellians(n_prev);
        let coef: Vec<f64> = mh
            .iter()
            .zip(&self.nodes.half_base)
            .map(|(mh, base)| a * mh * base)
            .collect();
        let n = self.last() - 1;
        let mut sys = Tridiagonal::zeros(n);
        let source = if self.config.mode.reinjects() {
            n_prev.max(0.0)
        } else {
            0.0
        };
        for r in 0..n {
            let i = r + 1;
            let w = self.nodes.volume[i] * self.nodes.metric[i];
            sys.lower[r] = -coef[i - 1];
            sys.upper[r] = -coef[i];
            sys.diag[r] = w * m[i] * (1.0 / tau + self.nodes.rate[i]) + coef[i - 1] + coef[i];
            sys.rhs[r] = w * state.q[i] / tau;
            if i == self.grid.reset_index {
                sys.rhs[r] += source;
            }
        }
        Ok(sys)
    }

    /// Advances `state` by one step and returns the explicit firing rate used.
    pub fn step(&self, state: &mut DensityState, clamped: &mut Vec<usize>) -> Result<f64> {
        let raw = self.firing_rate(state);
        if raw < 0.0 {
            clamped.push(state.step);
        }
        let n_used = raw.max(0.0);
        state.firing_history.push((state.t, raw));
        let sys = self.assemble(state, n_used)?;
        let u = thomas_solve(&sys)?;
        let (m, _) = self.maxwellians(n_used);
        for (r, ur) in u.iter().enumerate() {
            state.q[r + 1] = ur * m[r + 1];
        }
        state.step += 1;
        state.t = state.step as f64 * self.config.tau;
        if state.q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: state.step,
                t: state.t,
            });
        }
        Ok(raw)
    }
}

/// Linear interpolation of a grid density at physical `x`.
pub fn interp_density(q: &[f64], grid: &LogisticGrid, x: f64) -> Result<f64> {
    if !grid.contains(x) || q.len() != grid.len() {
        return Err(Error::invalid(format!(
            "x = {x} outside [{}, {}]",
            grid.x_nodes[0],
            grid.x_nodes[grid.len() - 1]
        )));
    }
    let y = logistic(x);
    let k = grid.y_nodes.partition_point(|&v| v <= y);
    if k == 0 {
        return Ok(q[0]);
    }
    if k >= grid.len() {
        return Ok(q[grid.len() - 1]);
    }
    let (y0, y1) = (grid.y_nodes[k - 1], grid.y_nodes[k]);
    let w = (y - y0) / (y1 - y0);
    Ok(q[k - 1] * (1.0 - w) + q[k] * w)
}

impl SgScheme {
    /// Linear interpolation at physical `x` on this mode's node set. Hard-wall
    /// densities fall linearly to zero at the threshold and vanish above it.
    pub fn interp_density(&self, q: &[f64], x: f64) -> Result<f64> {
        if !self.grid.contains(x) || q.len() != self.grid.len() {
            return Err(Error::invalid(format!(
                "x = {x} outside the computational domain"
            )));
        }
        let pos = &self.nodes.pos;
        let last = self.last();
        let y = logistic(x);
        if y >= pos[last] {
            return Ok(if self.config.mode.is_hard_wall() {
                0.0
            } else {
                q[last]
            });
        }
        let k = pos.partition_point(|&v| v <= y).max(1);
        let value = |i: usize| if i == last { 0.0 } else { q[i] };
        let w = (y - pos[k - 1]) / (pos[k] - pos[k - 1]);
        Ok(value(k - 1) * (1.0 - w) + value(k) * w)
    }
}

impl SgScheme {
    /// Knots `(x, F)` of the trapezoid CDF of `q` over this mode's node set.
    /// In killed modes the final value is the surviving mass.
    pub fn cdf_knots(&self, q: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let last = self.last();
        let mut xs = Vec::with_capacity(last + 2);
        let mut cdf = Vec::with_capacity(last + 2);
        let value = |i: usize| if i == last { 0.0 } else { q[i] };
        let mut acc = 0.0;
        xs.push(self.nodes.x[0]);
        cdf.push(0.0);
        for i in 1..=last {
            acc += 0.5 * (self.nodes.x[i] - self.nodes.x[i - 1]) * (value(i) + value(i - 1));
            xs.push(self.nodes.x[i]);
            cdf.push(acc);
        }
        let x_end = self.grid.x_nodes[self.grid.len() - 1];
        if xs[xs.len() - 1] < x_end {
            xs.push(x_end);
            cdf.push(acc);
        }
        (xs, cdf)
    }

    /// Trapezoid CDF of `q` at physical `x` (clamped to the domain).
    pub fn cdf_at(&self, q: &[f64], x: f64) -> f64 {
        let (xs, cdf) = self.cdf_knots(q);
        interp_knots(&xs, &cdf, x)
    }

    /// Trapezoid CDF of `q` at every grid node.
    pub fn node_cdf(&self, q: &[f64]) -> Vec<f64> {
        let (xs, cdf) = self.cdf_knots(q);
        self.grid
            .x_nodes
            .iter()
            .map(|&x| interp_knots(&xs, &cdf, x))
            .collect()
    }

    /// `(x, f)` on `x ≥ 1`: the interpolated value at the threshold followed
    /// by every node above it.
    pub fn threshold_restriction(&self, q: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut xs = vec![THRESHOLD];
        let mut fs = vec![self.interp_density(q, THRESHOLD)?];
        for (j, &x) in self.grid.x_nodes.iter().enumerate() {
            if x > THRESHOLD {
                xs.push(x);
                fs.push(q[j]);
            }
        }
        Ok((xs, fs))
    }
}

fn interp_knots(xs: &[f64], v: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&s| s <= x);
    if k == 0 {
        return v[0];
    }
    if k >= xs.len() {
        return v[xs.len() - 1];
    }
    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    // increment form keeps flat stretches exactly flat
    v[k - 1] + w * (v[k] - v[k - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RateKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn scheme(mode: SolverMode, spec: DischargeSpec, n_cells: usize) -> SgScheme {
        SgScheme::new(SolverConfig {
            n_cells,
            ..SolverConfig::default().with_mode(mode).with_spec(spec)
        })
        .unwrap()
    }

    #[test]
    fn maxwellian_examples() {
        let spec = DischargeSpec::default();
        assert_eq!(maxwellian(0.0, 3.0, &spec), 1.0);
        assert_relative_eq!(
            maxwellian(1.0, 0.0, &spec),
            (-0.5f64).exp(),
            max_relative = 1e-15
        );
        let spec = spec.with_b(-0.7);
        assert_eq!(maxwellian(-0.7 * 2.0, 2.0, &spec), 1.0);
    }

    #[test]
    fn quadrature_vanishes_without_rate_or_mass_above_threshold() {
        let grid = build_logistic_grid(-4.0, 4.0, 256).unwrap();
        let off = DischargeSpec::new(0.25, RateKind::Disabled).unwrap();
        assert_eq!(
            firing_rate_quadrature(&vec![1.0; grid.len()], &grid, &off),
            0.0
        );
        let spec = DischargeSpec::default();
        let q: Vec<f64> = grid
            .x_nodes
            .iter()
            .map(|&x| if x < 1.0 { 1.0 } else { 0.0 })
            .collect();
        assert_eq!(firing_rate_quadrature(&q, &grid, &spec), 0.0);
    }

    #[test]
    fn quadrature_of_constant_density_matches_direct_sum() {
        let grid = build_logistic_grid(-4.0, 4.0, 512).unwrap();
        let spec = DischargeSpec::new(0.125, RateKind::Step).unwrap();
        let c = 0.3;
        let oracle = c / spec.delta
            * grid.h
            * grid
                .y_nodes
                .iter()
                .filter(|&&y| y >= 0.5)
                .map(|&y| metric(y))
                .sum::<f64>();
        let got = firing_rate_quadrature(&vec![c; grid.len()], &grid, &spec);
        assert_relative_eq!(got, oracle, max_relative = 1e-13);
        // and the continuum value c (x_max - 1) / δ up to quadrature error
        assert_relative_eq!(got, c * 3.0 / spec.delta, max_relative = 2e-2);
    }

    #[test]
    fn well_balanced_on_discrete_maxwellian() {
        for (b, n_prev) in [(0.0, 0.0), (1.0, 0.8), (-1.0, 2.5)] {
            let spec = DischargeSpec::new(0.25, RateKind::Disabled)
                .unwrap()
                .with_b(b);
            for mode in [SolverMode::DischargeFull, SolverMode::HardWallFull] {
                let s = scheme(mode, spec, 256);
                let q = s.discrete_maxwellian(n_prev);
                let flux = s.half_node_fluxes(&q, n_prev);
                let scale = flux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                // interior half nodes only; the ends face the Dirichlet zeros
                for (i, f) in flux.iter().enumerate().take(flux.len() - 1).skip(1) {
                    assert!(f.abs() <= 1e-12 * scale.max(1.0), "half node {i}: {f}");
                }
            }
        }
    }

    #[test]
    fn zero_density_stays_zero() {
        let s = scheme(SolverMode::DischargeFull, DischargeSpec::default(), 128);
        let mut st = DensityState {
            q: vec![0.0; s.grid.len()],
            t: 0.0,
            step: 0,
            firing_history: Vec::new(),
        };
        assert_eq!(s.total_mass(&st), 0.0);
        let n = s.step(&mut st, &mut Vec::new()).unwrap();
        assert_eq!(n, 0.0);
        assert!(st.q.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gaussian_datum_has_unit_mass() {
        for n_cells in [512, 1024] {
            for mode in SolverMode::ALL {
                let s = scheme(mode, DischargeSpec::default(), n_cells);
                let m = s.total_mass(&s.initial_state());
                assert!((m - 1.0).abs() <= 1e-4, "{} n={n_cells}: {m}", mode.name());
            }
        }
    }

    #[test]
    fn point_mass_has_unit_mass() {
        for mode in SolverMode::ALL {
            let mut cfg = SolverConfig::default().with_mode(mode);
            cfg.initial = InitialDatum::PointMass { x: 0.0 };
            let s = SgScheme::new(cfg).unwrap();
            assert_relative_eq!(s.total_mass(&s.initial_state()), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn tiny_step_is_near_identity() {
        for mode in SolverMode::ALL {
            let mut prev = f64::INFINITY;
            for tau in [1e-4, 1e-6, 1e-8] {
                let cfg = SolverConfig {
                    tau,
                    n_cells: 256,
                    ..SolverConfig::default().with_mode(mode)
                };
                let s = SgScheme::new(cfg).unwrap();
                let mut st = s.initial_state();
                let q0 = st.q.clone();
                s.step(&mut st, &mut Vec::new()).unwrap();
                let diff = q0
                    .iter()
                    .zip(&st.q)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(diff < prev, "{}: tau {tau} moved {diff}", mode.name());
                prev = diff;
            }
            assert!(prev < 1e-3, "{}: {prev}", mode.name());
        }
    }

    #[test]
    fn interp_hits_nodes_exactly() {
        let s = scheme(SolverMode::DischargeFull, DischargeSpec::default(), 128);
        let st = s.initial_state();
        for j in [3, 40, 77] {
            let x = s.grid.x_nodes[j];
            assert_eq!(s.interp_density(&st.q, x).unwrap(), st.q[j]);
            assert_eq!(interp_density(&st.q, &s.grid, x).unwrap(), st.q[j]);
        }
        assert!(s.interp_density(&st.q, 9.0).is_err());
    }

    #[test]
    fn cdf_is_monotone_and_reaches_mass() {
        for mode in SolverMode::ALL {
            let s = scheme(mode, DischargeSpec::default(), 256);
            let st = s.initial_state();
            let cdf = s.node_cdf(&st.q);
            assert!(cdf.windows(2).all(|w| w[1] >= w[0] - 1e-14));
            assert!((cdf[cdf.len() - 1] - 1.0).abs() < 1e-3, "{}", mode.name());
        }
    }

    #[test]
    fn hard_wall_density_vanishes_above_threshold() {
        let s = scheme(SolverMode::HardWallFull, DischargeSpec::default(), 256);
        let mut st = s.initial_state();
        for _ in 0..50 {
            s.step(&mut st, &mut Vec::new()).unwrap();
        }
        for (j, &x) in s.grid.x_nodes.iter().enumerate() {
            if x > 1.0 {
                assert_eq!(st.q[j], 0.0);
            }
        }
        assert_eq!(s.interp_density(&st.q, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_state() {
        let s = scheme(SolverMode::DischargeFull, DischargeSpec::default(), 64);
        let mut st = s.initial_state();
        st.q[5] = f64::NAN;
        assert!(matches!(s.assemble(&st, 0.0), Err(Error::Assembly(_))));
        let st = DensityState {
            q: vec![0.0; 3],
            ..s.initial_state()
        };
        assert!(s.assemble(&st, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn assembled_systems_are_diagonally_dominant(
            mode_ix in 0usize..4,
            delta in 0.005f64..2.0,
            b in -2.0f64..2.0,
            n_prev in 0.0f64..20.0,
            log_tau in -8.0f64..1.0,
            n_cells in 16usize..300,
        ) {
            let spec = DischargeSpec::new(delta, RateKind::Step).unwrap().with_b(b);
            let cfg = SolverConfig {
                tau: 10f64.powf(log_tau),
                n_cells,
                ..SolverConfig::default().with_mode(SolverMode::ALL[mode_ix]).with_spec(spec)
            };
            let s = SgScheme::new(cfg).unwrap();
            let sys = s.assemble(&s.initial_state(), n_prev).unwrap();
            prop_assert!(sys.is_diagonally_dominant());
        }

        #[test]
        fn well_balance_for_any_rate_and_drift(n_prev in 0.0f64..10.0, b in -3.0f64..3.0) {
            let spec = DischargeSpec::new(0.5, RateKind::Disabled).unwrap().with_b(b);
            let s = scheme(SolverMode::DischargeFull, spec, 64);
            let q = s.discrete_maxwellian(n_prev);
            let flux = s.half_node_fluxes(&q, n_prev);
            let scale = flux.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for f in &flux[1..flux.len() - 1] {
                prop_assert!(f.abs() <= 1e-12 * scale);
            }
        }
    }
}
