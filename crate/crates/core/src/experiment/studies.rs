//! Study drivers behind the command-line entry point.
//!
//! Every study isolates its cells: a failing solve is recorded with its
//! message and the sweep goes on. Cells run in parallel and are assembled in
//! `(b, k)` order, so outputs are byte-identical across runs.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::analysis::convolve_time;
use crate::analysis::{
    fit_self_similar, kolmogorov_distance, sup_discrepancy_density, sup_discrepancy_rate,
    weighted_rate_integral, CollapseWindow, ConvergenceReport, SelfSimilarFit,
    ThresholdRestriction,
};
use crate::error::{Error, Result};
use crate::fp::{
    solve_fp, solve_fp_with, FiringSeries, InitialDatum, SolveOutput, SolverConfig, SolverMode,
};
use crate::model::{DischargeSpec, RESET};
use crate::sim::{
    coupled_ensemble, empirical_cdf, empirical_firing_rate, empirical_jump_time_density,
    empirical_sub_cdf, firing_estimate_to_csv, mean_jump_count, paths_to_csv, simulate_ensemble,
    states_at, survival, PathKind, SimOptions, StartState,
};
use crate::table::{emit_csv, write_text, Cell, CsvTable};

use super::config::ExperimentConfig;

/// Name of the resolved-config file written beside every run's outputs.
pub const CONFIG_ECHO: &str = "config.txt";

/// Marker written in place of a value whose cell failed.
pub const FAILED: &str = "failed";

fn echo_config(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    write_text(&dir.join(CONFIG_ECHO), &config.serialize())
}

fn fmt_b(b: f64) -> String {
    format!("{b}")
}

/// Discrepancies between a regularized model and its hard-wall limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `sup_x |f^δ - f|` at `t_max`, full models.
    Density,
    /// Same for the killed models.
    KilledDensity,
    /// `sup_t |N^δ - N|`.
    Rate,
    /// `sup_t |N_0^δ - N_0|`.
    KilledRate,
    /// Kolmogorov distance of the full-model marginals at `t_max`.
    Kolmogorov,
    /// `|∫ N^δ dt - ∫ N dt|`.
    WeakRate,
    /// `|∫ t N^δ dt - ∫ t N dt|`.
    WeakRateT,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::Density,
        Quantity::KilledDensity,
        Quantity::Rate,
        Quantity::KilledRate,
        Quantity::Kolmogorov,
        Quantity::WeakRate,
        Quantity::WeakRateT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Density => "f",
            Quantity::KilledDensity => "f0",
            Quantity::Rate => "N",
            Quantity::KilledRate => "N0",
            Quantity::Kolmogorov => "K",
            Quantity::WeakRate => "W1",
            Quantity::WeakRateT => "Wt",
        }
    }

    fn index(self) -> usize {
        Quantity::ALL.iter().position(|&q| q == self).unwrap_or(0)
    }
}

/// One `(b, k)` cell of the convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCell {
    pub b: f64,
    pub k: i32,
    pub delta: f64,
    /// Indexed like [`Quantity::ALL`].
    pub values: std::result::Result<[f64; 7], String>,
}

impl ConvergenceCell {
    pub fn get(&self, q: Quantity) -> Option<f64> {
        self.values.as_ref().ok().map(|v| v[q.index()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantityFit {
    pub quantity: Quantity,
    pub b: f64,
    pub report: std::result::Result<ConvergenceReport, String>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub cells: Vec<ConvergenceCell>,
    pub fits: Vec<QuantityFit>,
}

impl ConvergenceStudy {
    pub fn fit(&self, q: Quantity, b: f64) -> Option<&ConvergenceReport> {
        self.fits
            .iter()
            .find(|f| f.quantity == q && f.b == b)
            .and_then(|f| f.report.as_ref().ok())
    }

    /// Discrepancy series of one `(quantity, b)`, ordered by `k`.
    pub fn series(&self, q: Quantity, b: f64) -> Vec<(i32, Option<f64>)> {
        self.cells
            .iter()
            .filter(|c| c.b == b)
            .map(|c| (c.k, c.get(q)))
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.values.is_err()).count()
            + self.fits.iter().filter(|f| f.report.is_err()).count()
    }

    /// `b,k,delta,quantity,D` in long form; failed cells carry the marker.
    pub fn discrepancy_table(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(["b", "k", "delta", "quantity", "D"]);
        for c in &self.cells {
            for q in Quantity::ALL {
                let d = match c.get(q) {
                    Some(v) => Cell::from(v),
                    None => Cell::from(FAILED),
                };
                t.push(vec![
                    c.b.into(),
                    (c.k as i64).into(),
                    c.delta.into(),
                    q.name().into(),
                    d,
                ])?;
            }
        }
        Ok(t)
    }

    /// `quantity,b,R_or_alpha,A_or_beta,residual`.
    pub fn table1(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(["quantity", "b", "R_or_alpha", "A_or_beta", "residual"]);
        for f in &self.fits {
            let row = match &f.report {
                Ok(r) => vec![
                    f.quantity.name().into(),
                    f.b.into(),
                    r.fit.rate.into(),
                    r.fit.prefactor.into(),
                    r.fit.residual.into(),
                ],
                Err(_) => vec![
                    f.quantity.name().into(),
                    f.b.into(),
                    FAILED.into(),
                    FAILED.into(),
                    FAILED.into(),
                ],
            };
            t.push(row)?;
        }
        Ok(t)
    }

    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        echo_config(config, dir)?;
        emit_csv(&self.discrepancy_table()?, &dir.join("discrepancies.csv"))?;
        emit_csv(&self.table1()?, &dir.join("table1.csv"))?;
        for f in &self.fits {
            if let Ok(r) = &f.report {
                let name = format!("convergence_{}_b{}.csv", f.quantity.name(), fmt_b(f.b));
                emit_csv(&r.to_csv()?, &dir.join(name))?;
            }
        }
        let mut failures = String::new();
        for c in &self.cells {
            if let Err(e) = &c.values {
                failures.push_str(&format!("b={} k={}: {e}\n", c.b, c.k));
            }
        }
        for f in &self.fits {
            if let Err(e) = &f.report {
                failures.push_str(&format!("fit {} b={}: {e}\n", f.quantity.name(), f.b));
            }
        }
        if !failures.is_empty() {
            write_text(&dir.join("failures.txt"), &failures)?;
        }
        Ok(())
    }
}

struct Reference {
    full: SolveOutput,
    killed: SolveOutput,
}

fn solve_pair(
    config: &ExperimentConfig,
    spec: DischargeSpec,
    modes: [SolverMode; 2],
) -> Result<(SolveOutput, SolveOutput)> {
    let (a, b) = rayon::join(
        || solve_fp(&config.solver(spec, modes[0])),
        || solve_fp(&config.solver(spec, modes[1])),
    );
    Ok((a?, b?))
}

fn weighted(n: &FiringSeries, phi: impl Fn(f64) -> f64) -> Result<f64> {
    let w: Vec<f64> = n.times.iter().map(|&t| phi(t)).collect();
    weighted_rate_integral(n, &w)
}

fn cell_values(
    reference: &Reference,
    full: &SolveOutput,
    killed: &SolveOutput,
) -> Result<[f64; 7]> {
    let cdf_a = full.scheme.node_cdf(full.final_density());
    let cdf_b = reference
        .full
        .scheme
        .node_cdf(reference.full.final_density());
    let (nd, nr) = (&full.firing, &reference.full.firing);
    let v = [
        sup_discrepancy_density(full.final_density(), reference.full.final_density())?,
        sup_discrepancy_density(killed.final_density(), reference.killed.final_density())?,
        sup_discrepancy_rate(nd, nr)?,
        sup_discrepancy_rate(&killed.firing, &reference.killed.firing)?,
        kolmogorov_distance(&cdf_a, &cdf_b)?,
        (weighted(nd, |_| 1.0)? - weighted(nr, |_| 1.0)?).abs(),
        (weighted(nd, |t| t)? - weighted(nr, |t| t)?).abs(),
    ];
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite discrepancy {bad}")));
    }
    Ok(v)
}

/// δ-sweep against the hard-wall references for every `b`, with power-law
/// fits over `fit_k`.
pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceStudy> {
    config.validate()?;
    let deltas = config.deltas();
    let per_b: Vec<Vec<ConvergenceCell>> = config
        .b_values
        .par_iter()
        .map(|&b| {
            let reference = solve_pair(
                config,
                config.spec(config.delta, b),
                [SolverMode::HardWallFull, SolverMode::HardWallKilled],
            )
            .map(|(full, killed)| Reference { full, killed });
            deltas
                .par_iter()
                .map(|&(k, delta)| {
                    let values = match &reference {
                        Err(e) => Err(format!("hard-wall reference: {e}")),
                        Ok(r) => solve_pair(
                            config,
                            config.spec(delta, b),
                            [SolverMode::DischargeFull, SolverMode::DischargeKilled],
                        )
                        .and_then(|(full, killed)| cell_values(r, &full, &killed))
                        .map_err(|e| e.to_string()),
                    };
                    ConvergenceCell {
                        b,
                        k,
                        delta,
                        values,
                    }
                })
                .collect()
        })
        .collect();
    let cells: Vec<ConvergenceCell> = per_b.into_iter().flatten().collect();

    let mut fits = Vec::new();
    for &b in &config.b_values {
        for q in Quantity::ALL {
            let row: Vec<&ConvergenceCell> = cells.iter().filter(|c| c.b == b).collect();
            let report = (|| {
                let mut ds = Vec::new();
                let mut vs = Vec::new();
                let mut window: Option<std::ops::Range<usize>> = None;
                for c in &row {
                    let Some(v) = c.get(q) else {
                        if config.fit_k.contains(&c.k) {
                            return Err(format!("cell k={} failed", c.k));
                        }
                        continue;
                    };
                    if config.fit_k.contains(&c.k) {
                        let start = window.map_or(ds.len(), |w| w.start);
                        window = Some(start..ds.len() + 1);
                    }
                    ds.push(c.delta);
                    vs.push(v);
                }
                let window = window.ok_or("fit window holds no cells")?;
                ConvergenceReport::new(ds, vs, window).map_err(|e| e.to_string())
            })();
            fits.push(QuantityFit {
                quantity: q,
                b,
                report,
            });
        }
    }
    Ok(ConvergenceStudy { cells, fits })
}

/// Regularized model family used by the self-similar study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Discharge,
    Killed,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Discharge => "discharge",
            Model::Killed => "killed",
        }
    }

    fn mode(self) -> SolverMode {
        match self {
            Model::Discharge => SolverMode::DischargeFull,
            Model::Killed => SolverMode::DischargeKilled,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelFit {
    pub model: Model,
    pub b: f64,
    pub fit: std::result::Result<SelfSimilarFit, String>,
}

#[derive(Debug, Clone)]
pub struct SelfSimilarStudy {
    pub fits: Vec<ModelFit>,
}

impl SelfSimilarStudy {
    pub fn fit(&self, model: Model, b: f64) -> Option<&SelfSimilarFit> {
        self.fits
            .iter()
            .find(|f| f.model == model && f.b == b)
            .and_then(|f| f.fit.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.fits.iter().filter(|f| f.fit.is_err()).count()
    }

    /// `quantity,b,R_or_alpha,A_or_beta,residual,collapse_error`; the
    /// residual is the larger of the two log-log fits.
    pub fn table2(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new([
            "quantity",
            "b",
            "R_or_alpha",
            "A_or_beta",
            "residual",
            "collapse_error",
        ]);
        for f in &self.fits {
            let mut row: Vec<Cell> = vec![f.model.name().into(), f.b.into()];
            match &f.fit {
                Ok(s) => row.extend([
                    s.alpha.into(),
                    s.beta.into(),
                    s.residual_alpha.max(s.residual_beta).into(),
                    s.collapse_error.into(),
                ]),
                Err(_) => row.extend((0..4).map(|_| Cell::from(FAILED))),
            }
            t.push(row)?;
        }
        Ok(t)
    }

    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        echo_config(config, dir)?;
        emit_csv(&self.table2()?, &dir.join("table2.csv"))?;
        let mut failures = String::new();
        for f in &self.fits {
            match &f.fit {
                Ok(s) => {
                    let name = format!("profile_{}_b{}.csv", f.model.name(), fmt_b(f.b));
                    emit_csv(&s.profile_csv()?, &dir.join(name))?;
                }
                Err(e) => failures.push_str(&format!("{} b={}: {e}\n", f.model.name(), f.b)),
            }
        }
        if !failures.is_empty() {
            write_text(&dir.join("failures.txt"), &failures)?;
        }
        Ok(())
    }
}

fn restriction(
    config: &ExperimentConfig,
    model: Model,
    b: f64,
    delta: f64,
) -> Result<ThresholdRestriction> {
    let out = solve_fp(&config.solver(config.spec(delta, b), model.mode()))?;
    let (x, f) = out.scheme.threshold_restriction(out.final_density())?;
    ThresholdRestriction::new(delta, x, f)
}

/// Fits `(α, β)` per `(model, b)` over `δ = 2^{-k}`, `k ∈ fit_k`.
pub fn run_self_similar_study(config: &ExperimentConfig) -> Result<SelfSimilarStudy> {
    config.validate()?;
    let window = CollapseWindow {
        level: config.collapse_level,
        ..CollapseWindow::default()
    };
    let jobs: Vec<(Model, f64)> = config
        .b_values
        .iter()
        .flat_map(|&b| [(Model::Discharge, b), (Model::Killed, b)])
        .collect();
    let fits = jobs
        .par_iter()
        .map(|&(model, b)| {
            let family: std::result::Result<Vec<_>, String> = config
                .fit_k
                .clone()
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&k| {
                    restriction(config, model, b, 0.5f64.powi(k)).map_err(|e| format!("k={k}: {e}"))
                })
                .collect();
            let fit =
                family.and_then(|fam| fit_self_similar(&fam, window).map_err(|e| e.to_string()));
            ModelFit { model, b, fit }
        })
        .collect();
    Ok(SelfSimilarStudy { fits })
}

/// One row of the validation suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Error message when the check could not be computed.
    pub error: Option<String>,
}

type Outcome<T> = std::result::Result<T, String>;

fn text<T>(r: Result<T>) -> Outcome<T> {
    r.map_err(|e| e.to_string())
}

impl Check {
    fn at_most(name: impl Into<String>, value: Outcome<f64>, tolerance: f64) -> Self {
        Self::judge(name, value, tolerance, |v, tol| v <= tol)
    }

    fn judge(
        name: impl Into<String>,
        value: Outcome<f64>,
        tolerance: f64,
        ok: impl Fn(f64, f64) -> bool,
    ) -> Self {
        match value {
            Ok(v) => Check {
                name: name.into(),
                value: v,
                tolerance,
                pass: v.is_finite() && ok(v, tolerance),
                error: None,
            },
            Err(e) => Check {
                name: name.into(),
                value: f64::NAN,
                tolerance,
                pass: false,
                error: Some(e),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `check,value,tolerance,pass`.
    pub fn table(&self) -> Result<CsvTable> {
        let mut t = CsvTable::new(["check", "value", "tolerance", "pass"]);
        for c in &self.checks {
            t.push(vec![
                c.name.clone().into(),
                c.value.into(),
                c.tolerance.into(),
                c.pass.into(),
            ])?;
        }
        Ok(t)
    }

    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        echo_config(config, dir)?;
        emit_csv(&self.table()?, &dir.join("validation.csv"))
    }
}

/// Tolerances of the validation suite.
pub mod tolerance {
    pub const KOLMOGOROV: f64 = 0.02;
    pub const WEAK_RATE: f64 = 0.02;
    pub const FIRST_JUMP_L1: f64 = 0.05;
    pub const SURVIVAL: f64 = 0.02;
    /// Multiple of the Monte Carlo standard error.
    pub const SUB_CDF_SIGMAS: f64 = 3.0;
    /// Number of coupled samples.
    pub const COUPLED_SAMPLES: usize = 10_000;
}

/// `L¹` distance between a histogram and the bin averages of `n`.
fn histogram_l1(density: &[f64], bin_width: f64, n: &FiringSeries) -> f64 {
    density
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let (lo, hi) = (i as f64 * bin_width, (i + 1) as f64 * bin_width);
            (h - average_over(n, lo, hi)).abs() * bin_width
        })
        .sum()
}

/// Mean of the piecewise-linear series over `[lo, hi]`.
fn average_over(n: &FiringSeries, lo: f64, hi: f64) -> f64 {
    let mut knots = vec![lo];
    knots.extend(n.times.iter().copied().filter(|&t| t > lo && t < hi));
    knots.push(hi);
    let area: f64 = knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (n.value_at(w[0]) + n.value_at(w[1])))
        .sum();
    area / (hi - lo)
}

/// Monte Carlo against Fokker–Planck cross-checks at `δ = config.delta`,
/// `b = config.b`.
pub fn run_validation_suite(config: &ExperimentConfig) -> Result<ValidationReport> {
    config.validate()?;
    let spec = config.spec(config.delta, config.b);
    let t_max = config.t_max;
    let mut checks = Vec::new();
    let paths = config.paths;

    // Pathwise ordering of the coupled first jumps (b = 0 dynamics).
    let coupled_spec = DischargeSpec { b: 0.0, ..spec };
    let coupled = coupled_ensemble(
        &coupled_spec,
        &SimOptions::new(config.dt, t_max),
        config.seed,
        tolerance::COUPLED_SAMPLES,
    )
    .map(|s| s.iter().filter(|c| c.is_ordered()).count() as f64 / s.len() as f64);
    checks.push(Check::judge(
        "coupling_ordering_rate",
        text(coupled),
        1.0,
        |v, tol| v >= tol,
    ));

    // Full model from the Gaussian datum: marginals and weighted firing.
    let times = [0.25 * t_max, 0.5 * t_max, t_max];
    let mut solver = config.solver(spec, SolverMode::DischargeFull);
    solver.snapshot_times = times.to_vec();
    let start = StartState::Gaussian {
        mean: config.x0,
        variance: config.sigma0_sq,
    };
    let full = solve_fp(&solver).and_then(|out| {
        let mut opts = SimOptions::new(config.dt, t_max)
            .with_samples(times.to_vec())
            .with_start(start);
        if spec.b != 0.0 {
            opts = opts.with_feedback(Arc::new(out.firing.clone()));
        }
        let ens = simulate_ensemble(
            PathKind::Discharge,
            &spec,
            &opts,
            config.seed.wrapping_add(1),
            paths,
        )?;
        Ok((out, ens))
    });
    let full = text(full);
    for &t in &times {
        let d = full.clone_err().and_then(|(out, ens)| {
            text((|| {
                let snap = out
                    .snapshot_at(t)
                    .ok_or_else(|| Error::invalid(format!("no snapshot at t = {t}")))?;
                let pde = out.scheme.node_cdf(&snap.f);
                let emp = empirical_cdf(states_at(ens, t))?;
                let mc_cdf: Vec<f64> = out.grid().x_nodes.iter().map(|&x| emp.eval(x)).collect();
                kolmogorov_distance(&pde, &mc_cdf)
            })())
        });
        checks.push(Check::at_most(
            format!("kolmogorov_t{t}"),
            d,
            tolerance::KOLMOGOROV,
        ));
    }
    let weak_1 = full.clone_err().and_then(|(out, ens)| {
        text((|| {
            Ok((weighted(&out.firing, |_| 1.0)? - mean_jump_count(ens, t_max)?.0).abs())
        })())
    });
    checks.push(Check::at_most(
        "weak_rate_phi_1",
        weak_1,
        tolerance::WEAK_RATE,
    ));
    let weak_t = full.clone_err().and_then(|(out, ens)| {
        let s: f64 = ens
            .iter()
            .map(|p| p.jump_times.iter().filter(|&&s| s <= t_max).sum::<f64>())
            .sum();
        text(weighted(&out.firing, |t| t)).map(|w| (w - s / ens.len() as f64).abs())
    });
    checks.push(Check::at_most(
        "weak_rate_phi_t",
        weak_t,
        tolerance::WEAK_RATE,
    ));
    drop(full);

    // Killed model from the Gaussian datum: first-jump law and survival.
    let killed = solve_fp(&config.solver(spec, SolverMode::DischargeKilled)).and_then(|out| {
        let mut opts = SimOptions::new(config.dt, t_max).with_start(start);
        if spec.b != 0.0 {
            opts = opts.with_feedback(Arc::new(out.firing.clone()));
        }
        let ens = simulate_ensemble(
            PathKind::KilledDischarge,
            &spec,
            &opts,
            config.seed.wrapping_add(2),
            paths,
        )?;
        let l1 = empirical_jump_time_density(&ens, 1, config.bin_width, t_max)
            .map(|h| histogram_l1(&h.density, config.bin_width, &out.firing))?;
        let surv = (survival(&ens, t_max)? - out.mass.last().copied().unwrap_or(f64::NAN)).abs();
        Ok((l1, surv))
    });
    let killed = text(killed);
    checks.push(Check::at_most(
        "first_jump_density_l1",
        killed.clone().map(|v| v.0),
        tolerance::FIRST_JUMP_L1,
    ));
    checks.push(Check::at_most(
        "survival_vs_killed_mass",
        killed.map(|v| v.1),
        tolerance::SURVIVAL,
    ));

    // Hard-wall first passage from the reset point.
    let hw_spec = DischargeSpec { b: 0.0, ..spec };
    let mut hw_solver = config.solver(hw_spec, SolverMode::HardWallKilled);
    hw_solver.initial = InitialDatum::PointMass { x: RESET };
    let hw_l1 = solve_fp(&hw_solver).and_then(|out| {
        let opts = SimOptions::new(config.dt, t_max).with_start(StartState::Point(RESET));
        let ens = simulate_ensemble(
            PathKind::HardWall,
            &hw_spec,
            &opts,
            config.seed.wrapping_add(3),
            paths,
        )?;
        let h = empirical_jump_time_density(&ens, 1, config.bin_width, t_max)?;
        Ok(histogram_l1(&h.density, config.bin_width, &out.firing))
    });
    checks.push(Check::at_most(
        "hard_wall_first_passage_l1",
        text(hw_l1),
        tolerance::FIRST_JUMP_L1,
    ));

    checks.extend(sub_cdf_checks(config, spec, paths));
    Ok(ValidationReport { checks })
}

trait CloneErr<T> {
    fn clone_err(&self) -> Outcome<&T>;
}

impl<T> CloneErr<T> for Outcome<T> {
    fn clone_err(&self) -> Outcome<&T> {
        self.as_ref().map_err(Clone::clone)
    }
}

/// `F_1 = F_0 ∗ f_{T_1}` from the killed solve started at the reset point,
/// against the Monte Carlo fraction with exactly one firing.
fn sub_cdf_checks(config: &ExperimentConfig, spec: DischargeSpec, paths: usize) -> Vec<Check> {
    let spec = DischargeSpec { b: 0.0, ..spec };
    let probes_x = [RESET, 0.5];
    let probes_t = [0.5 * config.t_max, config.t_max];
    let names: Vec<String> = probes_x
        .iter()
        .flat_map(|x| {
            probes_t
                .iter()
                .map(move |t| format!("sub_cdf_F1_x{x}_t{t}"))
        })
        .collect();

    let mut solver = config.solver(spec, SolverMode::DischargeKilled);
    solver.initial = InitialDatum::PointMass { x: RESET };
    let mut f0: Vec<[f64; 2]> = Vec::new();
    let computed = solve_fp_with(&solver, |scheme, state| {
        f0.push(probes_x.map(|x| scheme.cdf_at(&state.q, x)));
    })
    .and_then(|out| {
        let t_grid: Vec<f64> = (0..f0.len()).map(|m| m as f64 * config.tau).collect();
        let opts = SimOptions::new(config.dt, config.t_max)
            .with_start(StartState::Point(RESET))
            .with_samples(probes_t.to_vec());
        let ens = simulate_ensemble(
            PathKind::Discharge,
            &spec,
            &opts,
            config.seed.wrapping_add(4),
            paths,
        )?;
        let mut rows = Vec::new();
        for (i, &x) in probes_x.iter().enumerate() {
            let prev: Vec<f64> = f0.iter().map(|v| v[i]).collect();
            let conv = convolve_time(&prev, &out.firing.values, &t_grid)?;
            for &t in &probes_t {
                let m = (t / config.tau).round() as usize;
                let p = empirical_sub_cdf(&ens, 1, x, t)?;
                let se = (p * (1.0 - p) / ens.len() as f64).sqrt();
                rows.push(((conv[m] - p).abs(), se));
            }
        }
        Ok(rows)
    });
    match computed {
        Ok(rows) => names
            .into_iter()
            .zip(rows)
            .map(|(name, (err, se))| {
                let tol = tolerance::SUB_CDF_SIGMAS * se;
                Check::at_most(name, Ok(err), tol)
            })
            .collect(),
        Err(e) => names
            .into_iter()
            .map(|name| Check::at_most(name, Err(e.to_string()), f64::NAN))
            .collect(),
    }
}

/// Monte Carlo ensemble of `config.process` with its outputs.
#[derive(Debug, Clone)]
pub struct SimulateRun {
    pub paths: Vec<crate::sim::PathRecord>,
    pub firing: crate::sim::FiringEstimate,
}

fn sample_grid(config: &ExperimentConfig) -> Vec<f64> {
    let n = (config.t_max / config.sample_dt).round().max(1.0) as usize;
    (0..=n)
        .map(|i| (i as f64 * config.sample_dt).min(config.t_max))
        .collect()
}

/// Simulates `paths` trajectories of `config.process` at `(delta, b)`.
/// With `b ≠ 0` the drift uses the firing rate of the matching solve.
pub fn run_simulate(config: &ExperimentConfig) -> Result<SimulateRun> {
    config.validate()?;
    let spec = config.spec(config.delta, config.b);
    let start = StartState::Gaussian {
        mean: config.x0,
        variance: config.sigma0_sq,
    };
    let mut opts = SimOptions::new(config.dt, config.t_max)
        .with_samples(sample_grid(config))
        .with_start(start);
    if spec.b != 0.0 {
        let mode = match config.process {
            PathKind::HardWall => SolverMode::HardWallFull,
            PathKind::Discharge => SolverMode::DischargeFull,
            PathKind::KilledDischarge => SolverMode::DischargeKilled,
        };
        opts = opts.with_feedback(Arc::new(solve_fp(&config.solver(spec, mode))?.firing));
    }
    let paths = simulate_ensemble(config.process, &spec, &opts, config.seed, config.paths)?;
    let firing = empirical_firing_rate(&paths, config.bin_width, config.t_max)?;
    Ok(SimulateRun { paths, firing })
}

impl SimulateRun {
    pub fn write(&self, config: &ExperimentConfig, dir: &Path) -> Result<()> {
        echo_config(config, dir)?;
        emit_csv(&paths_to_csv(&self.paths)?, &dir.join("paths.csv"))?;
        emit_csv(
            &firing_estimate_to_csv(&self.firing)?,
            &dir.join("firing.csv"),
        )?;
        let (mean, se) = mean_jump_count(&self.paths, config.t_max)?;
        let mut t = CsvTable::new(["statistic", "value"]);
        t.push(vec!["paths".into(), self.paths.len().into()])?;
        t.push(vec!["mean_jump_count".into(), mean.into()])?;
        t.push(vec!["mean_jump_count_stderr".into(), se.into()])?;
        t.push(vec![
            "survival".into(),
            survival(&self.paths, config.t_max)?.into(),
        ])?;
        emit_csv(&t, &dir.join("summary.csv"))
    }
}

/// Single Fokker–Planck solve in `config.mode` with snapshots every
/// `sample_dt`.
pub fn run_solve(config: &ExperimentConfig) -> Result<SolveOutput> {
    config.validate()?;
    let spec = config.spec(config.delta, config.b);
    let mut solver: SolverConfig = config.solver(spec, config.mode);
    solver.snapshot_times = sample_grid(config);
    solve_fp(&solver)
}

/// `t,x,f` for every snapshot and `t,N,mass` for every step.
pub fn write_solve(out: &SolveOutput, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    echo_config(config, dir)?;
    let mut density = CsvTable::new(["t", "x", "f"]);
    for s in &out.snapshots {
        for (x, f) in out.grid().x_nodes.iter().zip(&s.f) {
            density.push(vec![s.t.into(), (*x).into(), (*f).into()])?;
        }
    }
    emit_csv(&density, &dir.join("density.csv"))?;
    let mut firing = CsvTable::new(["t", "N", "mass"]);
    for (i, (t, n)) in out.firing.times.iter().zip(&out.firing.values).enumerate() {
        let m = out.mass.get(i).copied().unwrap_or(f64::NAN);
        firing.push(vec![(*t).into(), (*n).into(), m.into()])?;
    }
    emit_csv(&firing, &dir.join("firing.csv"))
}
