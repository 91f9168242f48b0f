//! Statistical certificates: both terms of the composition bound estimated
//! from samples, each replaced by an exact binomial upper limit.

use super::{
    constraint_label, feasible, level_constraint, thresholds, Certificate, ConstantsMode, Regime,
};
use crate::concentration::clopper_pearson_upper;
use crate::error::{invalid, Error, Infeasibility, Result};

/// Samples of `|X|_p` on one candidate partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSamples {
    pub p: f64,
    pub steps: usize,
    pub delta: f64,
    pub x_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProblem {
    pub epsilon: f64,
    pub horizon: f64,
    pub regime: Regime,
    pub candidates: Vec<PartitionSamples>,
    /// Samples of `‖a‖∞` (or `‖a‖_{L¹}` in the L1 regime); `None` without drift.
    pub drift_norms: Option<Vec<f64>>,
    pub confidence: f64,
}

/// Number of leading samples used only to pick the level `I`.
fn pilot_size(n: usize) -> usize {
    (n / 10).max(1)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Certificate whose terms are Clopper–Pearson upper limits.
///
/// For each candidate, `I` is the median of a pilot tenth of the `|X|_p`
/// samples; the exceedance counts use the remaining samples. Limits are
/// Bonferroni-adjusted over the candidates, so the reported total holds
/// with probability at least `1 − 2(1 − confidence)`.
pub fn empirical_certificate(problem: &EmpiricalProblem) -> Result<Certificate> {
    let EmpiricalProblem {
        epsilon,
        horizon,
        regime,
        ref candidates,
        ref drift_norms,
        confidence,
    } = *problem;
    if candidates.is_empty() {
        return Err(invalid("no candidate partitions"));
    }
    if !(confidence > 0.5 && confidence < 1.0) {
        return Err(invalid(format!(
            "confidence must lie in (0.5, 1), got {confidence}"
        )));
    }
    if !(epsilon > 0.0 && horizon > 0.0) {
        return Err(invalid("epsilon and horizon must be positive"));
    }
    if let Some(d) = drift_norms {
        if d.is_empty() {
            return Err(invalid("empty drift sample"));
        }
    }
    let per_limit = 1.0 - (1.0 - confidence) / candidates.len() as f64;

    let mut best: Option<Certificate> = None;
    let mut least_violation = f64::INFINITY;
    for cand in candidates {
        if cand.x_norms.len() < 2 {
            return Err(invalid("need at least two samples per candidate"));
        }
        let (pilot, rest) = cand.x_norms.split_at(pilot_size(cand.x_norms.len()));
        let level = median(pilot);
        if !(level > 0.0) {
            least_violation = least_violation.min(f64::INFINITY);
            continue;
        }
        if !feasible(
            regime, cand.p, cand.steps, cand.delta, level, epsilon, horizon,
        ) {
            let (lhs, rhs) =
                level_constraint(regime, cand.p, cand.steps, cand.delta, level, epsilon);
            least_violation = least_violation.min(lhs / rhs);
            continue;
        }
        let (h, x) = thresholds(
            regime,
            cand.p,
            cand.steps,
            cand.delta,
            level,
            drift_norms.is_some(),
        );
        let hits = rest.iter().filter(|&&v| (v - level).abs() >= h).count() as u64;
        let conc = clopper_pearson_upper(hits, rest.len() as u64, per_limit);
        let drift_term = match (drift_norms, x) {
            (Some(d), Some(x)) => {
                let hits = d.iter().filter(|&&v| v >= x).count() as u64;
                clopper_pearson_upper(hits, d.len() as u64, per_limit)
            }
            _ => 0.0,
        };
        let mut cert = Certificate {
            regime,
            epsilon,
            horizon,
            p: cand.p,
            steps: cand.steps,
            delta: cand.delta,
            level,
            concentration_threshold: h,
            drift_threshold: x,
            term_concentration: 0.0,
            term_drift: 0.0,
            total: 1.0,
            vacuous: true,
            constants_mode: ConstantsMode::Statistical,
            confidence: Some(1.0 - 2.0 * (1.0 - confidence)),
            envelope: None,
            provenance: Vec::new(),
        };
        cert.set_terms(conc, drift_term);
        let better = match &best {
            None => true,
            Some(b) => (cert.total, cert.steps, cert.delta) < (b.total, b.steps, b.delta),
        };
        if better {
            best = Some(cert);
        }
    }
    match best {
        Some(mut c) => {
            c.provenance.push(format!(
                "I = median of {} pilot samples; terms are one-sided Clopper-Pearson limits at {} each over {} candidates",
                pilot_size(candidates[0].x_norms.len()),
                per_limit,
                candidates.len()
            ));
            Ok(c)
        }
        None => Err(Error::Infeasible(Infeasibility {
            constraint: constraint_label(regime).to_string(),
            ratio: least_violation,
        })),
    }
}
