use crate::error::{Error, Result};

/// Exact transition of `dX = -X dt + √2 dB` over `dt`:
/// `e^{-dt} x + sqrt(1 - e^{-2 dt}) xi` for a standard-normal `xi`.
pub fn ou_step(x: f64, dt: f64, xi: f64) -> Result<f64> {
    Ok(OuKernel::new(dt)?.advance(x, xi, 0.0))
}

/// Precomputed exact OU transition for a fixed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuKernel {
    pub dt: f64,
    decay: f64,
    noise: f64,
}

impl OuKernel {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let decay = (-dt).exp();
        // 1 - e^{-2dt} without cancellation for small dt
        let noise = (-(-2.0 * dt).exp_m1()).sqrt();
        Ok(Self { dt, decay, noise })
    }

    /// One step with the drift `-(x - center)`; `center = b N` is frozen over the step.
    #[inline]
    pub fn advance(&self, x: f64, xi: f64, center: f64) -> f64 {
        self.decay * x + center * (1.0 - self.decay) + self.noise * xi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn deterministic_examples() {
        assert_eq!(ou_step(0.0, 0.1, 0.0).unwrap(), 0.0);
        assert!((ou_step(1.0, std::f64::consts::LN_2, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(ou_step(0.0, 0.0, 0.0).is_err());
        assert!(ou_step(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn stationary_variance_is_one() {
        // Moment oracle: iterate to t = 10 (≫ relaxation time 1) from 0 and
        // compare the sample variance with the stationary value a = 1.
        let k = OuKernel::new(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let mut x = 0.0;
            for _ in 0..20 {
                let xi: f64 = StandardNormal.sample(&mut rng);
                x = k.advance(x, xi, 0.0);
            }
            s1 += x;
            s2 += x * x;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // sd of the variance estimator ≈ sqrt(2/n) ≈ 0.0032
        assert!((var - 1.0).abs() < 0.015, "variance {var}");
        assert!(mean.abs() < 0.01);
    }
}
