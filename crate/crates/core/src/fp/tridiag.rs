//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Tridiagonal system `A u = rhs`. Row `i` reads
/// `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s += self.lower[i] * u[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// `diag ≥ |lower| + |upper|` on every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let lo = if i > 0 { self.lower[i].abs() } else { 0.0 };
            let up = if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            self.diag[i].abs() >= lo + up
        })
    }
}

/// Solves the system by forward elimination and back substitution.
pub fn thomas_solve(sys: &Tridiagonal) -> Result<Vec<f64>> {
    let n = sys.len();
    if sys.lower.len() != n || sys.upper.len() != n || sys.rhs.len() != n {
        return Err(Error::invalid("tridiagonal bands have mismatched lengths"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];

    let mut pivot = sys.diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    c[0] = sys.upper[0] / pivot;
    d[0] = sys.rhs[0] / pivot;
    for i in 1..n {
        pivot = sys.diag[i] - sys.lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: i });
        }
        c[i] = if i + 1 < n { sys.upper[i] / pivot } else { 0.0 };
        d[i] = (sys.rhs[i] - sys.lower[i] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity() {
        let mut sys = Tridiagonal::zeros(5);
        sys.diag.fill(1.0);
        sys.rhs = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(thomas_solve(&sys).unwrap(), sys.rhs);
    }

    #[test]
    fn two_by_two() {
        let sys = Tridiagonal {
            lower: vec![0.0, 1.0],
            diag: vec![2.0, 2.0],
            upper: vec![1.0, 0.0],
            rhs: vec![3.0, 3.0],
        };
        let u = thomas_solve(&sys).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-15 && (u[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_dominant_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 50;
            let mut sys = Tridiagonal::zeros(n);
            for i in 0..n {
                sys.lower[i] = rng.random_range(-1.0..1.0);
                sys.upper[i] = rng.random_range(-1.0..1.0);
                sys.diag[i] = sys.lower[i].abs() + sys.upper[i].abs() + rng.random_range(0.01..1.0);
                sys.rhs[i] = rng.random_range(-10.0..10.0);
            }
            let u = thomas_solve(&sys).unwrap();
            let r = sys.apply(&u);
            let rmax = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let res = r
                .iter()
                .zip(&sys.rhs)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(res <= 1e-12 * rmax, "residual {res}");
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let mut sys = Tridiagonal::zeros(3);
        sys.diag = vec![1.0, 0.0, 1.0];
        assert!(matches!(
            thomas_solve(&sys),
            Err(Error::ZeroPivot { row: 1 })
        ));
    }
}
