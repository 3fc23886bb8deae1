/// How a simulated record ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Terminal {
    Survived,
    KilledAtFirstJump,
}

/// One simulated trajectory.
///
/// `times`/`states` hold the requested sample instants; `jump_times` every
/// firing up to `end_time`. A sample taken in the step that ends with a
/// firing sees the reset value.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub jump_times: Vec<f64>,
    pub terminal: Terminal,
    pub end_time: f64,
}

impl PathRecord {
    pub(crate) fn new() -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            jump_times: Vec::new(),
            terminal: Terminal::Survived,
            end_time: 0.0,
        }
    }

    /// `n_t`: number of firings in `[0, t]`.
    pub fn jump_count_at(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    /// Sampled state at `t`, if `t` was a sample instant reached by the record.
    pub fn state_at(&self, t: f64) -> Option<f64> {
        let tol = 1e-9 * t.abs().max(1.0);
        let k = self.times.partition_point(|&s| s < t - tol);
        match self.times.get(k) {
            Some(&s) if (s - t).abs() <= tol => Some(self.states[k]),
            _ => None,
        }
    }

    /// `T_n` (1-based), if it happened.
    pub fn nth_jump(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return None;
        }
        self.jump_times.get(n - 1).copied()
    }

    pub fn first_jump(&self) -> Option<f64> {
        self.nth_jump(1)
    }
}

/// First hard-wall hitting time and first discharge time of one OU path
/// driven by one exponential clock. `None` means censored at `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSample {
    pub t_hard: Option<f64>,
    pub t_soft: Option<f64>,
    pub gamma: f64,
}

impl CoupledSample {
    /// `t_hard ≤ t_soft`, reading a censored time as `+∞`.
    pub fn is_ordered(&self) -> bool {
        match (self.t_hard, self.t_soft) {
            (Some(h), Some(s)) => h <= s,
            (None, Some(_)) => false,
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_count_is_right_continuous() {
        let mut p = PathRecord::new();
        p.jump_times = vec![0.2, 0.5];
        assert_eq!(p.jump_count_at(0.0), 0);
        assert_eq!(p.jump_count_at(0.2), 1);
        assert_eq!(p.jump_count_at(0.49), 1);
        assert_eq!(p.jump_count_at(0.5), 2);
        assert_eq!(p.nth_jump(2), Some(0.5));
        assert_eq!(p.nth_jump(3), None);
    }

    #[test]
    fn ordering_with_censoring() {
        let s = |h, t| CoupledSample {
            t_hard: h,
            t_soft: t,
            gamma: 1.0,
        };
        assert!(s(Some(0.1), Some(0.2)).is_ordered());
        assert!(s(Some(0.1), None).is_ordered());
        assert!(s(None, None).is_ordered());
        assert!(!s(None, Some(0.3)).is_ordered());
        assert!(!s(Some(0.4), Some(0.3)).is_ordered());
    }
}
