use serde::{Deserialize, Serialize};

use super::SmallBallEstimate;
use crate::error::{invalid, Result};

/// Minimum number of hits for a point to enter a fit.
const MIN_HITS: f64 = 50.0;
/// Points with a larger estimate are outside the small-ball regime.
const MAX_P: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitMode {
    /// Regress `log(−log v)` on `log(1/ε)`.
    #[default]
    Raw,
    /// Regress `log(−log(v/C₁))` on `log(1/ε)` for a known prefactor `C₁`.
    PrefactorAware { prefactor: f64 },
}

/// `v(ε) ≈ C₁ exp(−ĉ₂ ε^{−γ̂})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub gamma_hat: f64,
    pub c2_hat: f64,
    pub r_squared: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    pub mode: FitMode,
}

/// Least-squares fit of the rate exponent to `(ε, v)` pairs.
pub fn fit_rate(pairs: &[(f64, f64)], mode: FitMode) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(invalid(format!(
            "need at least 3 points, got {}",
            pairs.len()
        )));
    }
    let c1 = match mode {
        FitMode::Raw => 1.0,
        FitMode::PrefactorAware { prefactor } if prefactor > 0.0 && prefactor.is_finite() => {
            prefactor
        }
        FitMode::PrefactorAware { prefactor } => {
            return Err(invalid(format!(
                "prefactor must be positive, got {prefactor}"
            )))
        }
    };
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(eps, v) in pairs {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {eps}")));
        }
        let r = v / c1;
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid(format!(
                "value {v} at epsilon {eps} leaves (0, {c1})"
            )));
        }
        xs.push(-eps.ln());
        ys.push((-r.ln()).ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(invalid("all epsilon values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let eps = pairs.iter().map(|p| p.0);
    Ok(RateFit {
        gamma_hat: slope,
        c2_hat: intercept.exp(),
        r_squared,
        eps_min: eps.clone().fold(f64::INFINITY, f64::min),
        eps_max: eps.fold(f64::NEG_INFINITY, f64::max),
        points: pairs.len(),
        mode,
    })
}

/// `(ε, p̂)` pairs of an estimate with at least 50 hits and `p̂ ≤ 0.9`.
pub fn fit_window(estimate: &SmallBallEstimate) -> Vec<(f64, f64)> {
    estimate
        .epsilon
        .iter()
        .zip(&estimate.p_hat)
        .filter(|(_, &p)| p * estimate.n_paths as f64 >= MIN_HITS && p <= MAX_P)
        .map(|(&e, &p)| (e, p))
        .collect()
}

/// Ratio of the largest to the smallest effective rate `−log v(ε) · ε^γ`.
pub fn effective_rate_spread(pairs: &[(f64, f64)], gamma: f64) -> Result<f64> {
    if pairs.is_empty() {
        return Err(invalid("no points"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &(eps, v) in pairs {
        if !(v > 0.0 && v < 1.0) {
            return Err(invalid(format!("value {v} leaves (0,1)")));
        }
        let r = -v.ln() * eps.powf(gamma);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(hi / lo)
}
