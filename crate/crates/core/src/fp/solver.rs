//! Time integration drivers for the four Fokker–Planck problems.

use crate::error::{Error, Result};

use super::grid::LogisticGrid;
use super::scheme::{DensityState, FiringSeries, SgScheme, SolverConfig, SolverMode};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// `f(x_j, t)` at the grid's physical nodes.
    pub f: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub scheme: SgScheme,
    pub snapshots: Vec<Snapshot>,
    pub firing: FiringSeries,
    /// Total mass after each step, starting with the initial datum.
    pub mass: Vec<f64>,
    /// Smallest density value seen over the run.
    pub min_density: f64,
    pub final_state: DensityState,
}

impl SolveOutput {
    pub fn grid(&self) -> &LogisticGrid {
        &self.scheme.grid
    }

    pub fn final_density(&self) -> &[f64] {
        &self.final_state.q
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        let tol = 0.5 * self.scheme.config.tau;
        self.snapshots.iter().find(|s| (s.t - t).abs() <= tol)
    }
}

/// One semi-implicit step; returns the explicit firing rate of the old state.
pub fn step_semi_implicit(state: &mut DensityState, scheme: &SgScheme) -> Result<f64> {
    let mut clamped = Vec::new();
    scheme.step(state, &mut clamped)
}

/// Runs any of the four modes from the configured initial datum to `t_max`.
pub fn solve_fp(config: &SolverConfig) -> Result<SolveOutput> {
    solve_fp_with(config, |_, _| {})
}

/// [`solve_fp`], calling `observe` on the initial state and after every step.
pub fn solve_fp_with<F>(config: &SolverConfig, mut observe: F) -> Result<SolveOutput>
where
    F: FnMut(&SgScheme, &DensityState),
{
    let scheme = SgScheme::new(config.clone())?;
    let n_steps = config.n_steps();
    let tau = config.tau;
    let snap_steps: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| (t / tau).round() as usize)
        .filter(|&s| s <= n_steps)
        .collect();

    let mut state = scheme.initial_state();
    let mut firing = FiringSeries::default();
    let mut mass = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    let mut min_density = state.q.iter().copied().fold(f64::INFINITY, f64::min);
    mass.push(scheme.total_mass(&state));
    observe(&scheme, &state);
    if snap_steps.contains(&0) {
        snapshots.push(Snapshot {
            t: 0.0,
            f: state.q.clone(),
        });
    }

    for _ in 0..n_steps {
        let t = state.t;
        let n = scheme.step(&mut state, &mut firing.clamped)?;
        firing.times.push(t);
        firing.values.push(n);
        mass.push(scheme.total_mass(&state));
        observe(&scheme, &state);
        min_density = state.q.iter().copied().fold(min_density, f64::min);
        if snap_steps.contains(&state.step) && state.step != n_steps {
            snapshots.push(Snapshot {
                t: state.t,
                f: state.q.clone(),
            });
        }
    }
    let n_last = scheme.firing_rate(&state);
    firing.times.push(state.t);
    firing.values.push(n_last);
    state.firing_history.push((state.t, n_last));
    snapshots.push(Snapshot {
        t: state.t,
        f: state.q.clone(),
    });

    Ok(SolveOutput {
        scheme,
        snapshots,
        firing,
        mass,
        min_density,
        final_state: state,
    })
}

/// Random-discharge problem, full or killed.
pub fn solve_discharge_fp(config: &SolverConfig) -> Result<SolveOutput> {
    match config.mode {
        SolverMode::DischargeFull | SolverMode::DischargeKilled => solve_fp(config),
        m => Err(Error::invalid(format!(
            "solve_discharge_fp called with mode {}",
            m.name()
        ))),
    }
}

/// Hard-wall problem, full or killed.
pub fn solve_hard_wall_fp(config: &SolverConfig) -> Result<SolveOutput> {
    match config.mode {
        SolverMode::HardWallFull | SolverMode::HardWallKilled => solve_fp(config),
        m => Err(Error::invalid(format!(
            "solve_hard_wall_fp called with mode {}",
            m.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::sup_discrepancy_density;
    use crate::model::{DischargeSpec, RateKind};

    fn config(mode: SolverMode, delta: f64, b: f64) -> SolverConfig {
        let spec = DischargeSpec::new(delta, RateKind::Step).unwrap().with_b(b);
        SolverConfig::default().with_mode(mode).with_spec(spec)
    }

    #[test]
    fn full_modes_conserve_mass_within_budget() {
        for mode in [SolverMode::DischargeFull, SolverMode::HardWallFull] {
            let cfg = config(mode, 0.125, 0.0);
            let out = solve_fp(&cfg).unwrap();
            let m = *out.mass.last().unwrap();
            assert!((m - 1.0).abs() <= 10.0 * cfg.tau, "{}: {m}", mode.name());
        }
    }

    #[test]
    fn killed_modes_lose_mass_monotonically() {
        for mode in [SolverMode::DischargeKilled, SolverMode::HardWallKilled] {
            let out = solve_fp(&config(mode, 0.125, 0.0)).unwrap();
            assert!(
                out.mass.windows(2).all(|w| w[1] <= w[0] + 1e-12),
                "{}",
                mode.name()
            );
            assert!(*out.mass.last().unwrap() < 0.95);
        }
    }

    #[test]
    fn killed_without_rate_only_leaks_through_the_far_boundary() {
        // the Dirichlet end at x = 4 absorbs the OU tail (density ~1e-4 there)
        let leak = |x_max: f64| {
            let mut cfg = config(SolverMode::DischargeKilled, 0.125, 0.0);
            cfg.spec.rate_kind = RateKind::Disabled;
            cfg.x_min = -x_max;
            cfg.x_max = x_max;
            cfg.n_cells = 2048;
            let out = solve_fp(&cfg).unwrap();
            assert!(out.mass.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            out.mass[0] - out.mass.last().unwrap()
        };
        let (narrow, wide) = (leak(4.0), leak(7.0));
        assert!(narrow <= 1e-3, "{narrow}");
        assert!(wide <= 1e-6, "{wide}");
    }

    #[test]
    fn positivity_and_nonnegative_rates_over_parameter_sweep() {
        for mode in SolverMode::ALL {
            for b in [1.0, 0.0, -1.0] {
                for k in [0, 3, 7] {
                    let cfg = SolverConfig {
                        n_cells: 256,
                        ..config(mode, 0.5f64.powi(k), b)
                    };
                    let out = solve_fp(&cfg).unwrap();
                    assert!(
                        out.min_density >= 0.0,
                        "{} b={b} k={k}: {}",
                        mode.name(),
                        out.min_density
                    );
                    assert!(out.firing.values.iter().all(|&n| n >= -1e-12));
                    for &m in &out.firing.clamped {
                        assert!(out.firing.values[m] < 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn observer_sees_every_state() {
        let cfg = SolverConfig {
            t_max: 0.05,
            n_cells: 64,
            ..SolverConfig::default()
        };
        let mut seen = Vec::new();
        let out = solve_fp_with(&cfg, |_, st| seen.push(st.step)).unwrap();
        assert_eq!(seen, (0..=cfg.n_steps()).collect::<Vec<_>>());
        assert_eq!(out.firing.len(), cfg.n_steps() + 1);
        assert_eq!(out.mass.len(), cfg.n_steps() + 1);
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let mut cfg = config(SolverMode::DischargeFull, 0.25, 0.0);
        cfg.n_cells = 128;
        cfg.snapshot_times = vec![0.0, 0.25, 0.5];
        let out = solve_fp(&cfg).unwrap();
        let ts: Vec<f64> = out.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 4);
        assert!(out.snapshot_at(0.25).is_some() && out.snapshot_at(1.0).is_some());
        assert_eq!(out.snapshot_at(1.0).unwrap().f, out.final_density());
    }

    #[test]
    fn entry_points_check_modes() {
        assert!(solve_discharge_fp(&config(SolverMode::HardWallFull, 0.5, 0.0)).is_err());
        assert!(solve_hard_wall_fp(&config(SolverMode::DischargeKilled, 0.5, 0.0)).is_err());
    }

    #[test]
    fn grid_refinement_is_consistent() {
        // restriction of the 2n grid to the n grid's nodes: every other node
        let run = |n: usize| {
            let cfg = SolverConfig {
                n_cells: n,
                ..config(SolverMode::DischargeFull, 0.25, 0.0)
            };
            solve_fp(&cfg).unwrap()
        };
        let (a, b, c) = (run(128), run(256), run(512));
        let coarse = |fine: &SolveOutput, coarse: &SolveOutput| -> f64 {
            let g = coarse.grid();
            let on_coarse: Vec<f64> = g
                .x_nodes
                .iter()
                .map(|&x| fine.scheme.interp_density(fine.final_density(), x).unwrap())
                .collect();
            sup_discrepancy_density(&on_coarse, coarse.final_density()).unwrap()
        };
        let d1 = coarse(&b, &a);
        let d2 = coarse(&c, &b);
        assert!(
            d1 / d2 >= 1.7,
            "refinement factor {} ({d1} -> {d2})",
            d1 / d2
        );
    }
}
