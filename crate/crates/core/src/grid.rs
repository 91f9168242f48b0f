//! Time grids, sample paths and the path functionals used by the bounds.
//!
//! All norms act on the raw grid values. The discrete supremum is a lower
//! proxy for the continuous one; certificates compare against it only when
//! their partition is a sub-grid of the simulation grid (see
//! [`UniformGrid::nests`]).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const NESTING_TOL: f64 = 1e-9;

/// Uniform partition `t_k = k * delta`, `k = 0..=steps`, of `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    horizon: f64,
    steps: usize,
    delta: f64,
}

impl UniformGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(invalid("step count must be at least 1"));
        }
        Ok(Self {
            horizon,
            steps,
            delta: horizon / steps as f64,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.delta
    }

    /// Returns the stride `m` such that a partition with step `coarse_delta`
    /// and `coarse_steps` steps consists of every `m`-th point of this grid,
    /// or `None` when it does not nest.
    pub fn nests(&self, coarse_delta: f64, coarse_steps: usize) -> Option<usize> {
        let ratio = coarse_delta / self.delta;
        let stride = ratio.round();
        if stride < 1.0 || (ratio - stride).abs() > NESTING_TOL * ratio.max(1.0) {
            return None;
        }
        let stride = stride as usize;
        (stride.checked_mul(coarse_steps)? <= self.steps).then_some(stride)
    }
}

/// Build a grid on `[0, horizon]` with `steps` intervals.
pub fn build_grid(horizon: f64, steps: usize) -> Result<UniformGrid> {
    UniformGrid::new(horizon, steps)
}

/// Process values on the points of a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: UniformGrid,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.steps() + 1 {
            return Err(invalid(format!(
                "path has {} values, grid needs {}",
                values.len(),
                grid.steps() + 1
            )));
        }
        Ok(Self { grid, values })
    }

    /// Path from its increments, starting at zero.
    pub fn from_increments(grid: UniformGrid, increments: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(increments.len() + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for dx in increments {
            acc += dx;
            values.push(acc);
        }
        Self::new(grid, values)
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.steps() + 1],
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        sup_abs(&self.values)
    }

    pub fn holder_norm(&self, beta: f64) -> Result<f64> {
        holder_norm_values(&self.values, self.grid.delta(), beta)
    }

    pub fn l1_norm(&self) -> f64 {
        l1_norm_values(&self.values, self.grid.delta())
    }

    pub fn increment_lp(&self, p: f64) -> Result<f64> {
        increment_lp_strided(&self.values, 1, self.grid.steps(), p)
    }
}

/// Maximum of `|values[k]|` over the grid.
pub fn sup_norm(path: &SamplePath) -> f64 {
    path.sup_norm()
}

/// Exact discrete Hölder seminorm over all grid pairs `s < t`.
pub fn holder_norm(path: &SamplePath, beta: f64) -> Result<f64> {
    path.holder_norm(beta)
}

/// Left-Riemann approximation of `∫ |f|`.
pub fn l1_norm(path: &SamplePath) -> f64 {
    path.l1_norm()
}

/// `ℓ^p` norm of the increments of the path.
pub fn increment_lp(path: &SamplePath, p: f64) -> Result<f64> {
    path.increment_lp(p)
}

pub(crate) fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub(crate) fn l1_norm_values(values: &[f64], delta: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    delta * values[..n].iter().map(|v| v.abs()).sum::<f64>()
}

/// O(N²) exact Hölder seminorm. Lags are grouped in dyadic blocks
/// `(2^(j-1), 2^j]`, visited from the longest; a block or lag is skipped when
/// the largest range over windows of `2^j + 1` points, divided by the lag
/// weight `(k δ)^β`, cannot beat the current maximum.
pub(crate) fn holder_norm_values(values: &[f64], delta: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!(
            "Hölder exponent must lie in (0,1), got {beta}"
        )));
    }
    let n = values.len();
    if n < 2 {
        return Err(invalid("Hölder norm needs at least one step"));
    }
    let window_ranges = dyadic_window_ranges(values);
    let weight = |lag: usize| (lag as f64 * delta).powf(beta);
    let mut best = 0.0_f64;
    for (j, &range) in window_ranges.iter().enumerate().rev() {
        let first = (1usize << j) / 2 + 1;
        let last = (1usize << j).min(n - 1);
        if range / weight(first) <= best {
            continue;
        }
        for lag in (first..=last).rev() {
            let w = weight(lag);
            if range / w <= best {
                continue;
            }
            best = best.max(max_abs_difference(&values[lag..], &values[..n - lag]) / w);
        }
    }
    Ok(best)
}

/// Entry `j` is the largest `max − min` over windows of `2^j + 1`
/// consecutive points, for `2^(j-1) < n − 1`.
fn dyadic_window_ranges(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut hi: Vec<f64> = values.windows(2).map(|w| w[0].max(w[1])).collect();
    let mut lo: Vec<f64> = values.windows(2).map(|w| w[0].min(w[1])).collect();
    let mut out = Vec::new();
    let mut span = 1;
    loop {
        out.push(hi.iter().zip(&lo).fold(0.0_f64, |m, (a, b)| m.max(a - b)));
        if span >= n - 1 {
            return out;
        }
        // windows of 2·span + 1 points, clipped at the right end
        let len = hi.len();
        for i in 0..len {
            let k = (i + span).min(len - 1);
            hi[i] = hi[i].max(hi[k]);
            lo[i] = lo[i].min(lo[k]);
        }
        span *= 2;
    }
}

fn max_abs_difference(head: &[f64], tail: &[f64]) -> f64 {
    let mut acc = [0.0_f64; 8];
    let mut hc = head.chunks_exact(8);
    let mut tc = tail.chunks_exact(8);
    for (h, t) in (&mut hc).zip(&mut tc) {
        for k in 0..8 {
            let d = (h[k] - t[k]).abs();
            acc[k] = if d > acc[k] { d } else { acc[k] };
        }
    }
    let rest = hc
        .remainder()
        .iter()
        .zip(tc.remainder())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    acc.iter().fold(rest, |m, &v| m.max(v))
}

/// `ℓ^p` norm of `count` increments taken every `stride` points.
pub(crate) fn increment_lp_strided(
    values: &[f64],
    stride: usize,
    count: usize,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p must be positive, got {p}")));
    }
    if count == 0 || stride * count >= values.len() {
        return Err(invalid("partition does not fit in the path"));
    }
    let incs = (1..=count).map(|k| (values[k * stride] - values[(k - 1) * stride]).abs());
    Ok(if p == 1.0 {
        incs.sum()
    } else if p == 2.0 {
        incs.map(|d| d * d).sum::<f64>().sqrt()
    } else {
        incs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p)
    })
}
