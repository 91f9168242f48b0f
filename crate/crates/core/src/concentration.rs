//! Tail bounds fed into the certificate engine, and exact binomial
//! (Clopper–Pearson) confidence limits for Monte Carlo frequencies.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{invalid, Result};

/// Centering `I` used in Gaussian ℓ² concentration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CenteringChoice {
    Mean,
    Median,
    /// `I = √(E‖Y‖₂²)`, available in closed form from the covariance.
    #[default]
    SqrtSecondMoment,
}

/// `min(1, 2 exp(−2t² / Σ r_k²))` for a sum of independent variables with
/// ranges `r_k`.
pub fn hoeffding_tail(ranges: &[f64], t: f64) -> f64 {
    let ss: f64 = ranges.iter().map(|r| r * r).sum();
    hoeffding_tail_sumsq(ss, t)
}

fn hoeffding_tail_sumsq(range_sumsq: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    (2.0 * (-2.0 * t * t / range_sumsq).exp()).min(1.0)
}

/// Two-sided Gaussian concentration of `‖Y‖₂` around the chosen center:
/// `2 exp(−h²/(2‖Γ‖₂))`, or `2 exp(−h²/(4‖Γ‖₂))` around `√(E‖Y‖₂²)`.
pub fn gauss_l2_tail(norm2: f64, h: f64, centering: CenteringChoice) -> f64 {
    if h <= 0.0 {
        return 1.0;
    }
    let denom = match centering {
        CenteringChoice::Mean | CenteringChoice::Median => 2.0,
        CenteringChoice::SqrtSecondMoment => 4.0,
    };
    (2.0 * (-h * h / (denom * norm2)).exp()).min(1.0)
}

/// A threshold-to-probability tail bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailModel {
    /// Fixed probability, whatever the threshold.
    Constant {
        probability: f64,
    },
    Hoeffding {
        range_sumsq: f64,
    },
    GaussL2 {
        norm2: f64,
        centering: CenteringChoice,
    },
    /// `|a| ≤ bound` almost surely.
    DriftBounded {
        bound: f64,
    },
    /// Borell–TIS: `P(sup|a| > x) ≤ exp(−(x − m)²/(2σ̄²))` for `x > m`,
    /// `m ≥ E sup|a|`, `σ̄² ≥ sup Var a_t`.
    DriftGaussBorell {
        mean_bound: f64,
        sup_variance: f64,
    },
    /// Clopper–Pearson upper limit of the exceedance frequency.
    Empirical {
        samples: Vec<f64>,
        confidence: f64,
    },
}

impl TailModel {
    pub fn hoeffding(ranges: &[f64]) -> Self {
        TailModel::Hoeffding {
            range_sumsq: ranges.iter().map(|r| r * r).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TailModel::Constant { probability } if !(0.0..=1.0).contains(probability) => {
                Err(invalid("probability must lie in [0,1]"))
            }
            TailModel::Hoeffding { range_sumsq } if !(*range_sumsq > 0.0) => {
                Err(invalid("ranges must be positive"))
            }
            TailModel::GaussL2 { norm2, .. } if !(*norm2 > 0.0) => {
                Err(invalid("covariance norm must be positive"))
            }
            TailModel::DriftGaussBorell { sup_variance, .. } if !(*sup_variance > 0.0) => {
                Err(invalid("sup-variance must be positive"))
            }
            TailModel::Empirical {
                samples,
                confidence,
            } => {
                if samples.is_empty() {
                    Err(invalid("no samples"))
                } else if !(*confidence > 0.5 && *confidence < 1.0) {
                    Err(invalid("confidence must lie in (0.5, 1)"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Upper bound on the probability that the quantity exceeds `threshold`.
    /// Nonincreasing in `threshold`, within `[0, 1]`.
    pub fn evaluate(&self, threshold: f64) -> f64 {
        match self {
            TailModel::Constant { probability } => *probability,
            TailModel::Hoeffding { range_sumsq } => hoeffding_tail_sumsq(*range_sumsq, threshold),
            TailModel::GaussL2 { norm2, centering } => gauss_l2_tail(*norm2, threshold, *centering),
            TailModel::DriftBounded { bound } => {
                if threshold > *bound {
                    0.0
                } else {
                    1.0
                }
            }
            TailModel::DriftGaussBorell {
                mean_bound,
                sup_variance,
            } => {
                if threshold <= *mean_bound {
                    1.0
                } else {
                    let d = threshold - mean_bound;
                    (-d * d / (2.0 * sup_variance)).exp()
                }
            }
            TailModel::Empirical {
                samples,
                confidence,
            } => {
                let hits = samples.iter().filter(|&&s| s >= threshold).count();
                clopper_pearson_upper(hits as u64, samples.len() as u64, *confidence)
            }
        }
    }
}

/// Drift tail `P(‖a‖ ≥ x)` under a drift model.
pub fn drift_tail(model: &TailModel, x: f64) -> Result<f64> {
    model.validate()?;
    Ok(model.evaluate(x))
}

/// Empirical exceedance frequency and its one-sided upper confidence limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalTail {
    pub p_hat: f64,
    pub upper_confidence: f64,
}

/// Fraction of `samples ≥ threshold`, with its Clopper–Pearson upper limit.
pub fn empirical_tail(samples: &[f64], threshold: f64, confidence: f64) -> Result<EmpiricalTail> {
    if samples.is_empty() {
        return Err(invalid("no samples"));
    }
    if !(confidence > 0.5 && confidence < 1.0) {
        return Err(invalid(format!(
            "confidence must lie in (0.5, 1), got {confidence}"
        )));
    }
    let n = samples.len() as u64;
    let hits = samples.iter().filter(|&&s| s >= threshold).count() as u64;
    Ok(EmpiricalTail {
        p_hat: hits as f64 / n as f64,
        upper_confidence: clopper_pearson_upper(hits, n, confidence),
    })
}

fn bisect(mut lo: f64, mut hi: f64, increasing: impl Fn(f64) -> f64, target: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if increasing(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// One-sided exact upper limit `U` with `P(Bin(n, U) ≤ hits) = 1 − confidence`.
pub fn clopper_pearson_upper(hits: u64, n: u64, confidence: f64) -> f64 {
    if hits >= n {
        return 1.0;
    }
    let alpha = 1.0 - confidence;
    if hits == 0 {
        return 1.0 - alpha.powf(1.0 / n as f64);
    }
    let (a, b) = ((hits + 1) as f64, (n - hits) as f64);
    bisect(0.0, 1.0, |p| beta_reg(a, b, p), 1.0 - alpha)
}

/// One-sided exact lower limit `L` with `P(Bin(n, L) ≥ hits) = 1 − confidence`.
pub fn clopper_pearson_lower(hits: u64, n: u64, confidence: f64) -> f64 {
    if hits == 0 {
        return 0.0;
    }
    let alpha = 1.0 - confidence;
    if hits >= n {
        return alpha.powf(1.0 / n as f64);
    }
    let (a, b) = (hits as f64, (n - hits + 1) as f64);
    // bisect returns the upper end of the bracket; step back inside it
    let l = bisect(0.0, 1.0, |p| beta_reg(a, b, p), alpha);
    if beta_reg(a, b, l) > alpha {
        f64::max(0.0, l - f64::EPSILON)
    } else {
        l
    }
}
