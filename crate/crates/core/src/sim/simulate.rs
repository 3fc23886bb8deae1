//! Single-path simulators. Every path owns its RNG stream, derived from
//! `(seed, path index)`, so ensembles reproduce under any schedule.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::fp::FiringSeries;
use crate::model::{DischargeSpec, RESET, THRESHOLD};

use super::ou::OuKernel;
use super::path::{CoupledSample, PathRecord, Terminal};

/// Counter-based stream for path `index` of experiment `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Where paths start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartState {
    Point(f64),
    /// Drawn per path, matching the Fokker–Planck initial datum.
    Gaussian {
        mean: f64,
        variance: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub t_max: f64,
    /// Instants at which the state is recorded; snapped to the step grid.
    pub sample_times: Vec<f64>,
    /// `None` starts at `spec.x0`.
    pub start: Option<StartState>,
    /// Firing-rate schedule `N(t)` entering the drift `-x + b N(t)`.
    /// Required when `b ≠ 0`.
    pub feedback: Option<Arc<FiringSeries>>,
}

impl SimOptions {
    pub fn new(dt: f64, t_max: f64) -> Self {
        Self {
            dt,
            t_max,
            sample_times: vec![t_max],
            start: None,
            feedback: None,
        }
    }

    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }

    pub fn with_start(mut self, start: StartState) -> Self {
        self.start = Some(start);
        self
    }

    pub fn with_feedback(mut self, n: Arc<FiringSeries>) -> Self {
        self.feedback = Some(n);
        self
    }

    fn validate(&self, spec: &DischargeSpec) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::invalid(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if spec.b != 0.0 && self.feedback.is_none() {
            return Err(Error::invalid(
                "b ≠ 0 needs a firing-rate schedule for the drift",
            ));
        }
        if let Some(StartState::Gaussian { variance, .. }) = self.start {
            if !(variance > 0.0) {
                return Err(Error::invalid("start variance must be positive"));
            }
        }
        spec.validate()
    }

    fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    /// Sorted, deduplicated step indices of the sample instants.
    fn sample_steps(&self) -> Vec<usize> {
        let n = self.n_steps();
        let mut s: Vec<usize> = self
            .sample_times
            .iter()
            .map(|&t| (t / self.dt).round() as usize)
            .filter(|&k| k <= n)
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// Per-path stepping context shared by the simulators.
struct Stepper<'a> {
    spec: &'a DischargeSpec,
    opts: &'a SimOptions,
    kernel: OuKernel,
    samples: Vec<usize>,
    next_sample: usize,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a DischargeSpec, opts: &'a SimOptions) -> Result<Self> {
        opts.validate(spec)?;
        Ok(Self {
            spec,
            opts,
            kernel: OuKernel::new(opts.dt)?,
            samples: opts.sample_steps(),
            next_sample: 0,
        })
    }

    fn start<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.opts.start.unwrap_or(StartState::Point(self.spec.x0)) {
            StartState::Point(x) => x,
            StartState::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
        }
    }

    fn center(&self, t: f64) -> f64 {
        match &self.opts.feedback {
            Some(n) if self.spec.b != 0.0 => self.spec.b * n.value_at(t),
            _ => 0.0,
        }
    }

    fn advance<R: Rng>(&self, x: f64, t: f64, rng: &mut R) -> f64 {
        let xi: f64 = StandardNormal.sample(rng);
        self.kernel.advance(x, xi, self.center(t))
    }

    /// Records `x` if `step` is a sample step.
    fn sample(&mut self, rec: &mut PathRecord, step: usize, x: f64) {
        while self.next_sample < self.samples.len() && self.samples[self.next_sample] < step {
            self.next_sample += 1;
        }
        if self.samples.get(self.next_sample) == Some(&step) {
            rec.times.push(step as f64 * self.opts.dt);
            rec.states.push(x);
            self.next_sample += 1;
        }
    }
}

/// Hard-wall process: OU motion, reset to 0 on reaching the threshold.
///
/// Crossings are detected per step; the firing time is linearly
/// interpolated inside the step and the state at the end of the step is the
/// reset value.
pub fn simulate_hard_wall(
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    index: u64,
) -> Result<PathRecord> {
    let mut st = Stepper::new(spec, opts)?;
    if let StartState::Point(p) = opts.start.unwrap_or(StartState::Point(spec.x0)) {
        if !(p < THRESHOLD) {
            return Err(Error::invalid(format!(
                "hard-wall start must be below the threshold, got {p}"
            )));
        }
    }
    let mut rng = path_rng(seed, index);
    let mut x = st.start(&mut rng);
    let mut rec = PathRecord::new();
    let dt = opts.dt;
    let n = opts.n_steps();
    if x >= THRESHOLD {
        rec.jump_times.push(0.0);
        x = RESET;
    }
    st.sample(&mut rec, 0, x);
    for s in 0..n {
        let t = s as f64 * dt;
        let mut xn = st.advance(x, t, &mut rng);
        if xn >= THRESHOLD {
            rec.jump_times.push(t + dt * (THRESHOLD - x) / (xn - x));
            xn = RESET;
        }
        x = xn;
        st.sample(&mut rec, s + 1, x);
    }
    rec.end_time = n as f64 * dt;
    Ok(rec)
}

fn discharge_path(
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    index: u64,
    killed: bool,
) -> Result<PathRecord> {
    let mut st = Stepper::new(spec, opts)?;
    let mut rng = path_rng(seed, index);
    let mut x = st.start(&mut rng);
    let mut rec = PathRecord::new();
    let dt = opts.dt;
    let n = opts.n_steps();
    st.sample(&mut rec, 0, x);
    for s in 0..n {
        let t = s as f64 * dt;
        let lam = spec.rate(x);
        let fires = lam > 0.0 && rng.random::<f64>() < -(-lam * dt).exp_m1();
        let mut xn = st.advance(x, t, &mut rng);
        if fires {
            xn = RESET;
            rec.jump_times.push(t + dt);
            if killed {
                rec.terminal = Terminal::KilledAtFirstJump;
                rec.end_time = t + dt;
                return Ok(rec);
            }
        }
        x = xn;
        st.sample(&mut rec, s + 1, x);
    }
    rec.end_time = n as f64 * dt;
    Ok(rec)
}

/// Random-discharge process: per step, fires with probability
/// `1 - exp(-λ(x) dt)` (λ at the step start) and resets to 0.
pub fn simulate_discharge(
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    index: u64,
) -> Result<PathRecord> {
    discharge_path(spec, opts, seed, index, false)
}

/// Random-discharge process stopped at its first firing.
pub fn simulate_killed_discharge(
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    index: u64,
) -> Result<PathRecord> {
    discharge_path(spec, opts, seed, index, true)
}

/// One OU path from the reset point with an independent `Exp(1)` clock.
///
/// `t_hard` is the first time the path reaches the threshold; `t_soft` the
/// first time `∫ λ(Z_s) ds` exceeds the clock. Both use the same piecewise
/// linear interpolant of the sampled path, so `t_hard ≤ t_soft` holds
/// pathwise.
pub fn simulate_coupled_first_jumps(
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    index: u64,
) -> Result<CoupledSample> {
    let mut rng = path_rng(seed, index);
    let gamma: f64 = Exp1.sample(&mut rng);
    coupled_with_clock(spec, opts, &mut rng, gamma)
}

/// [`simulate_coupled_first_jumps`] with a given clock value.
pub fn coupled_with_clock<R: Rng>(
    spec: &DischargeSpec,
    opts: &SimOptions,
    rng: &mut R,
    gamma: f64,
) -> Result<CoupledSample> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!(
            "clock value must be nonnegative, got {gamma}"
        )));
    }
    let st = Stepper::new(spec, opts)?;
    let dt = opts.dt;
    let n = opts.n_steps();
    let mut z = RESET;
    let mut integral = 0.0;
    let mut t_hard = None;
    let mut t_soft = None;
    for s in 0..n {
        let t = s as f64 * dt;
        let zn = st.advance(z, t, rng);
        if t_hard.is_none() && zn >= THRESHOLD {
            t_hard = Some(t + dt * (THRESHOLD - z) / (zn - z));
        }
        let seg = |frac: f64| -> f64 {
            let dz = (zn - z) * frac;
            if dz.abs() < 1e-300 {
                spec.rate(z) * dt * frac
            } else {
                dt * frac * (spec.rate_primitive(z + dz) - spec.rate_primitive(z)) / dz
            }
        };
        let full = seg(1.0);
        if integral + full > gamma {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if integral + seg(mid) > gamma {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let ts = t + hi * dt;
            // ∫λ vanishes before the hard crossing; absorb bisection roundoff
            t_soft = Some(t_hard.map_or(ts, |h: f64| ts.max(h)));
            break;
        }
        integral += full;
        z = zn;
    }
    Ok(CoupledSample {
        t_hard,
        t_soft,
        gamma,
    })
}
