//! Logistic change of variables `y = 1/(1+e^{-(x-1)})` and the uniform `y`-grid
//! built on it. Resolution concentrates around the threshold `x = 1`
//! (`y = 1/2`), where the metric `dx/dy = 1/(y - y²)` is smallest.

use crate::error::{Error, Result};
use crate::model::{RESET, THRESHOLD};

/// `h_L`: physical coordinate to logistic coordinate.
#[inline]
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-(x - THRESHOLD)).exp())
}

/// `g_L`: inverse of [`logistic`].
#[inline]
pub fn inverse_logistic(y: f64) -> f64 {
    THRESHOLD + (y / (1.0 - y)).ln()
}

/// `g_L'(y) = 1/(y - y²)`.
#[inline]
pub fn metric(y: f64) -> f64 {
    1.0 / (y - y * y)
}

/// Smallest admissible distance from the last sub-threshold node to the wall,
/// in units of `h`. Closer nodes are dropped from the hard-wall node set.
const MIN_WALL_OFFSET: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticGrid {
    pub x_min: f64,
    pub x_max: f64,
    /// Uniform spacing in `y`.
    pub h: f64,
    /// Node coordinates `y_0 < y_1 < ... < y_J`. `y_0` and `y_J` carry the
    /// homogeneous Dirichlet condition.
    pub y_nodes: Vec<f64>,
    /// Physical coordinates `g_L(y_j)`.
    pub x_nodes: Vec<f64>,
    /// Index `D` with `y_D = h_L(0)` exactly.
    pub reset_index: usize,
    /// Last node strictly below the threshold kept in hard-wall node sets.
    pub wall_index: usize,
    /// `(1/2 - y_wall_index) / h`.
    pub wall_offset: f64,
}

/// Builds a uniform `y`-grid on `[h_L(x_min), h_L(x_max)]` whose spacing is
/// chosen so the reset point `h_L(0)` is a node.
///
/// The number of cells is adjusted to the closest value compatible with
/// that alignment; the right end lands within `h/2` of `h_L(x_max)`.
pub fn build_logistic_grid(x_min: f64, x_max: f64, n_cells: usize) -> Result<LogisticGrid> {
    if !(x_min < RESET && RESET < THRESHOLD && THRESHOLD < x_max)
        || !x_max.is_finite()
        || !x_min.is_finite()
    {
        return Err(Error::Grid(format!(
            "domain [{x_min}, {x_max}] must contain the reset point and the threshold"
        )));
    }
    if n_cells < 16 {
        return Err(Error::Grid(format!(
            "n_cells must be at least 16, got {n_cells}"
        )));
    }
    let y_lo = logistic(x_min);
    let y_hi = logistic(x_max);
    let y_r = logistic(RESET);
    let frac = (y_r - y_lo) / (y_hi - y_lo);
    let reset_index = ((n_cells as f64) * frac).round().max(1.0) as usize;
    let h = (y_r - y_lo) / reset_index as f64;
    let mut last = ((y_hi - y_lo) / h).round() as usize;
    while y_lo + last as f64 * h >= 1.0 {
        last -= 1;
    }
    if last <= reset_index + 2 {
        return Err(Error::Grid(
            "reset point not representable on this grid".into(),
        ));
    }

    let mut y_nodes: Vec<f64> = (0..=last).map(|j| y_lo + j as f64 * h).collect();
    y_nodes[0] = y_lo;
    y_nodes[reset_index] = y_r;
    let x_nodes = y_nodes.iter().map(|&y| inverse_logistic(y)).collect();

    let y_wall = logistic(THRESHOLD);
    let mut wall_index = y_nodes.partition_point(|&y| y < y_wall) - 1;
    let mut wall_offset = (y_wall - y_nodes[wall_index]) / h;
    if wall_offset < MIN_WALL_OFFSET {
        wall_index -= 1;
        wall_offset = (y_wall - y_nodes[wall_index]) / h;
    }
    if wall_index <= reset_index + 1 {
        return Err(Error::Grid("threshold too close to the reset node".into()));
    }

    Ok(LogisticGrid {
        x_min,
        x_max,
        h,
        y_nodes,
        x_nodes,
        reset_index,
        wall_index,
        wall_offset,
    })
}

impl LogisticGrid {
    pub fn len(&self) -> usize {
        self.y_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_nodes.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.y_nodes.len() - 1
    }

    pub fn metric_at(&self, j: usize) -> f64 {
        metric(self.y_nodes[j])
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_nodes[0] && x <= self.x_nodes[self.len() - 1]
    }

    /// Node positions (in `y`) of the hard-wall problem: the grid nodes up to
    /// `wall_index`, then the absorbing point `y = 1/2`.
    pub fn wall_positions(&self) -> Vec<f64> {
        let mut p = self.y_nodes[..=self.wall_index].to_vec();
        p.push(logistic(THRESHOLD));
        p
    }
}
