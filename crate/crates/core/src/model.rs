//! Shared model parameters: the discharge regularization and its rate function.

use crate::error::{Error, Result};

/// Firing threshold `V_F`.
pub const THRESHOLD: f64 = 1.0;
/// Reset potential `V_R`.
pub const RESET: f64 = 0.0;

/// Shape of the state-dependent discharge intensity above threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKind {
    /// `0` below threshold, linear ramp `(x-1)/δ²` on `[1, 1+δ]`, `1/δ` beyond.
    LinearRamp,
    /// `0` below threshold, `1/δ` at and above it.
    Step,
    /// Intensity identically zero. The process never discharges.
    Disabled,
}

impl RateKind {
    pub fn name(self) -> &'static str {
        match self {
            RateKind::LinearRamp => "ramp",
            RateKind::Step => "step",
            RateKind::Disabled => "disabled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ramp" | "linear" | "linearramp" | "linear_ramp" => Some(RateKind::LinearRamp),
            "step" => Some(RateKind::Step),
            "disabled" | "off" | "zero" => Some(RateKind::Disabled),
            _ => None,
        }
    }
}

/// Parameters of the random-discharge regularization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DischargeSpec {
    /// Regularization scale; the intensity saturates at `1/delta`.
    pub delta: f64,
    pub rate_kind: RateKind,
    /// Mean-field connectivity: the drift is `-x + b N(t)`.
    pub b: f64,
    /// Diffusion coefficient.
    pub a: f64,
    /// Initial state for point-started runs.
    pub x0: f64,
}

impl Default for DischargeSpec {
    fn default() -> Self {
        Self {
            delta: 0.125,
            rate_kind: RateKind::Step,
            b: 0.0,
            a: 1.0,
            x0: -1.0,
        }
    }
}

impl DischargeSpec {
    pub fn new(delta: f64, rate_kind: RateKind) -> Result<Self> {
        let spec = Self {
            delta,
            rate_kind,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(Error::invalid(format!(
                "a must be positive, got {}",
                self.a
            )));
        }
        if !self.b.is_finite() || !self.x0.is_finite() {
            return Err(Error::invalid("b and x0 must be finite"));
        }
        Ok(())
    }

    /// Discharge intensity at `x`.
    #[inline]
    pub fn rate(&self, x: f64) -> f64 {
        discharge_rate(x, self)
    }

    /// Antiderivative of the intensity, `∫_{-∞}^x λ(z) dz`.
    pub fn rate_primitive(&self, x: f64) -> f64 {
        let d = self.delta;
        let u = x - THRESHOLD;
        match self.rate_kind {
            RateKind::Disabled => 0.0,
            RateKind::Step => u.max(0.0) / d,
            RateKind::LinearRamp => {
                if u <= 0.0 {
                    0.0
                } else if u <= d {
                    u * u / (2.0 * d * d)
                } else {
                    0.5 + (u - d) / d
                }
            }
        }
    }
}

/// State-dependent discharge intensity `λ^δ(x)`.
#[inline]
pub fn discharge_rate(x: f64, spec: &DischargeSpec) -> f64 {
    let d = spec.delta;
    match spec.rate_kind {
        RateKind::Disabled => 0.0,
        RateKind::Step => {
            if x >= THRESHOLD {
                1.0 / d
            } else {
                0.0
            }
        }
        RateKind::LinearRamp => {
            if x <= THRESHOLD {
                0.0
            } else if x <= THRESHOLD + d {
                (x - THRESHOLD) / (d * d)
            } else {
                1.0 / d
            }
        }
    }
}
