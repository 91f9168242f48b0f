use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::csv_number;
use crate::concentration::{clopper_pearson_lower, clopper_pearson_upper};
use crate::error::{invalid, Result};
use crate::grid::{holder_norm_values, l1_norm_values, sup_abs, UniformGrid};
use crate::rng::SeedSpec;
use crate::simulate::{PathSampler, ProcessSpec};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;
const MIN_PATHS: usize = 1000;

/// Path norm defining the small ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormKind {
    Sup,
    Holder {
        beta: f64,
    },
    /// `∫₀ᵀ |y_t| dt`.
    L1,
}

impl NormKind {
    fn validate(&self) -> Result<()> {
        match *self {
            NormKind::Holder { beta } if !(beta > 0.0 && beta < 1.0) => Err(invalid(format!(
                "Hölder exponent must lie in (0,1), got {beta}"
            ))),
            _ => Ok(()),
        }
    }

    fn evaluate(&self, values: &[f64], delta: f64) -> f64 {
        match *self {
            NormKind::Sup => sup_abs(values),
            NormKind::Holder { beta } => {
                holder_norm_values(values, delta, beta).expect("validated exponent")
            }
            NormKind::L1 => l1_norm_values(values, delta),
        }
    }
}

/// `P(‖y‖ ≤ ε)` on a grid of `ε`, all from one shared sample of paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallEstimate {
    pub epsilon: Vec<f64>,
    pub hits: Vec<u64>,
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub confidence: f64,
    pub n_paths: usize,
    pub norm: NormKind,
    pub spec_digest: String,
    pub horizon: f64,
    pub steps: usize,
    pub seed: u64,
}

impl SmallBallEstimate {
    /// Columns `epsilon,p_hat,ci_lo,ci_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epsilon,p_hat,ci_lo,ci_hi\n");
        for k in 0..self.epsilon.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_number(self.epsilon[k]),
                csv_number(self.p_hat[k]),
                csv_number(self.ci_lo[k]),
                csv_number(self.ci_hi[k])
            ));
        }
        out
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid::new(self.horizon, self.steps).expect("grid validated at estimation")
    }
}

/// FNV-1a digest of the debug rendering of a process specification.
pub fn spec_digest(spec: &ProcessSpec) -> String {
    let text = format!("{spec:?}");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Norms of `y` for paths `0..n_paths` of master seed `seed`, in stream order.
pub fn norm_samples(
    spec: &ProcessSpec,
    norm: NormKind,
    n_paths: usize,
    grid: UniformGrid,
    seed: u64,
) -> Result<Vec<f64>> {
    norm.validate()?;
    let sampler = PathSampler::new(spec, grid)?;
    let delta = grid.delta();
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|i| norm.evaluate(&sampler.sample_y(SeedSpec::new(seed, i)), delta))
        .collect())
}

/// Counts and Clopper–Pearson limits from precomputed norms.
#[allow(clippy::too_many_arguments)]
pub fn estimate_from_norms(
    norms: &[f64],
    eps_grid: &[f64],
    confidence: f64,
    norm: NormKind,
    spec_digest: String,
    grid: UniformGrid,
    seed: u64,
) -> Result<SmallBallEstimate> {
    if eps_grid.is_empty() {
        return Err(invalid("empty epsilon grid"));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(invalid("epsilon values must be positive and finite"));
    }
    if eps_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("epsilon grid must be strictly increasing"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!(
            "confidence must lie in (0,1), got {confidence}"
        )));
    }
    let n = norms.len();
    if n == 0 {
        return Err(invalid("no samples"));
    }
    let mut sorted = norms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let hits: Vec<u64> = eps_grid
        .iter()
        .map(|&e| sorted.partition_point(|v| *v <= e) as u64)
        .collect();
    let p_hat = hits.iter().map(|&h| h as f64 / n as f64).collect();
    let ci_lo = hits
        .iter()
        .map(|&h| clopper_pearson_lower(h, n as u64, confidence))
        .collect();
    let ci_hi = hits
        .iter()
        .map(|&h| clopper_pearson_upper(h, n as u64, confidence))
        .collect();
    Ok(SmallBallEstimate {
        epsilon: eps_grid.to_vec(),
        hits,
        p_hat,
        ci_lo,
        ci_hi,
        confidence,
        n_paths: n,
        norm,
        spec_digest,
        horizon: grid.horizon(),
        steps: grid.steps(),
        seed,
    })
}

/// Simulate `n_paths` paths once and count `‖y‖ ≤ ε` for every `ε`.
///
/// Norms are evaluated on the simulation grid, so the estimate concerns the
/// discrete maximum; it over-covers the continuous-time event.
pub fn estimate_smallball(
    spec: &ProcessSpec,
    norm: NormKind,
    eps_grid: &[f64],
    n_paths: usize,
    grid: UniformGrid,
    seed: u64,
    confidence: f64,
) -> Result<SmallBallEstimate> {
    if n_paths < MIN_PATHS {
        return Err(invalid(format!(
            "need at least {MIN_PATHS} paths, got {n_paths}"
        )));
    }
    if eps_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("epsilon grid must be strictly increasing"));
    }
    let norms = norm_samples(spec, norm, n_paths, grid, seed)?;
    estimate_from_norms(
        &norms,
        eps_grid,
        confidence,
        norm,
        spec_digest(spec),
        grid,
        seed,
    )
}
