use rayon::prelude::*;

use crate::bounds::{
    empirical_certificate, Certificate, EmpiricalProblem, PartitionSamples, Regime,
};
use crate::error::{invalid, Result};
use crate::grid::{increment_lp_strided, l1_norm_values, sup_abs, UniformGrid};
use crate::rng::SeedSpec;
use crate::simulate::{PathSampler, ProcessSpec};

/// Strides `2^k` dividing the number of steps, finest first.
fn dyadic_strides(steps: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = 1;
    while steps.is_multiple_of(s) && s <= steps {
        out.push(s);
        s *= 2;
    }
    out
}

/// Statistical certificates for every `ε`, from one sample of `n_paths`
/// draws of `(X, a)` under master seed `seed`.
///
/// Candidates are the dyadic sub-partitions of `grid` with `p = 2`; the
/// drift is measured by `‖a‖_{L¹}` in the L1 regime and by `‖a‖∞` otherwise.
/// Each entry is an error when no candidate is feasible at that `ε`.
pub fn statistical_certificates(
    spec: &ProcessSpec,
    regime: Regime,
    eps_grid: &[f64],
    n_paths: usize,
    grid: UniformGrid,
    seed: u64,
    confidence: f64,
) -> Result<Vec<Result<Certificate>>> {
    if n_paths < 1000 {
        return Err(invalid(format!("need at least 1000 paths, got {n_paths}")));
    }
    let sampler = PathSampler::new(spec, grid)?;
    let strides = dyadic_strides(grid.steps());
    let delta = grid.delta();
    let draws: Vec<(Vec<f64>, Option<f64>)> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let r = sampler.sample(SeedSpec::new(seed, i));
            let norms = strides
                .iter()
                .map(|&s| {
                    increment_lp_strided(&r.x, s, grid.steps() / s, 2.0)
                        .expect("dyadic stride fits")
                })
                .collect();
            let drift = r.drift.as_ref().map(|a| match regime {
                Regime::L1 => l1_norm_values(a, delta),
                Regime::Sup | Regime::Holder { .. } => sup_abs(a),
            });
            (norms, drift)
        })
        .collect();
    let candidates: Vec<PartitionSamples> = strides
        .iter()
        .enumerate()
        .map(|(k, &s)| PartitionSamples {
            p: 2.0,
            steps: grid.steps() / s,
            delta: s as f64 * delta,
            x_norms: draws.iter().map(|d| d.0[k]).collect(),
        })
        .collect();
    let drift_norms: Option<Vec<f64>> = draws.iter().map(|d| d.1).collect();
    Ok(eps_grid
        .iter()
        .map(|&epsilon| {
            empirical_certificate(&EmpiricalProblem {
                epsilon,
                horizon: grid.horizon(),
                regime,
                candidates: candidates.clone(),
                drift_norms: drift_norms.clone(),
                confidence,
            })
        })
        .collect())
}
