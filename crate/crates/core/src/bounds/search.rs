//! Grid search for the best feasible `(p, N, δ, I)`.

use rayon::prelude::*;

use super::{
    constraint_label, feasible, level_constraint, thresholds, Certificate, ConstantsMode, Regime,
};
use crate::concentration::TailModel;
use crate::error::{invalid, Error, Infeasibility, Result};

/// A candidate partition with its level `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partition {
    pub p: f64,
    pub steps: usize,
    pub delta: f64,
    pub level: f64,
}

/// Tail model of `||X|_p − I|` for a candidate partition.
pub type ConcentrationFactory<'a> = dyn Fn(&Partition) -> TailModel + Sync + 'a;
/// Level `I` for `(p, N, δ)`; non-positive or non-finite means unavailable.
pub type LevelRule<'a> = dyn Fn(f64, usize, f64) -> f64 + Sync + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub p_values: Vec<f64>,
    pub points_per_decade: usize,
    /// Width of the `δ` grid, centred on the seed.
    pub decades: f64,
    /// Centre of the `δ` grid; `T/100` when absent.
    pub delta_seed: Option<f64>,
    /// Snap candidate steps to multiples of this value, so that every
    /// partition is a sub-grid of a simulation grid with this step.
    pub lattice: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            p_values: vec![1.0, 2.0],
            points_per_decade: 40,
            decades: 3.0,
            delta_seed: None,
            lattice: None,
        }
    }
}

impl SearchConfig {
    /// Candidate steps, ascending and deduplicated, all `≤ horizon`.
    pub fn deltas(&self, horizon: f64) -> Vec<f64> {
        let seed = self.delta_seed.unwrap_or(horizon / 100.0);
        let half = (self.decades * self.points_per_decade as f64 / 2.0).round() as i64;
        let mut out: Vec<f64> = Vec::new();
        for k in -half..=half {
            let d = seed * 10f64.powf(k as f64 / self.points_per_decade.max(1) as f64);
            match self.lattice {
                None => out.push(d),
                Some(l) => {
                    let m = d / l;
                    for mult in [m.floor(), m.ceil()] {
                        if mult >= 1.0 {
                            out.push(mult * l);
                        }
                    }
                }
            }
        }
        out.retain(|d| d.is_finite() && *d > 0.0 && *d <= horizon * (1.0 + 1e-12));
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        out
    }
}

/// Number of whole steps of size `delta` in `horizon`.
pub(crate) fn steps_in(horizon: f64, delta: f64) -> usize {
    (horizon / delta * (1.0 + 1e-12)).floor() as usize
}

enum Outcome {
    Feasible(Certificate),
    Violated(f64),
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn evaluate_tuple(
    epsilon: f64,
    horizon: f64,
    regime: Regime,
    p: f64,
    delta: f64,
    concentration: &ConcentrationFactory,
    level_rule: &LevelRule,
    drift: Option<&TailModel>,
) -> std::result::Result<Certificate, f64> {
    let steps = steps_in(horizon, delta);
    if steps == 0 {
        return Err(f64::INFINITY);
    }
    let level = level_rule(p, steps, delta);
    if !(level.is_finite() && level > 0.0) {
        return Err(f64::INFINITY);
    }
    if !feasible(regime, p, steps, delta, level, epsilon, horizon) {
        let (lhs, rhs) = level_constraint(regime, p, steps, delta, level, epsilon);
        return Err(lhs / rhs);
    }
    let part = Partition {
        p,
        steps,
        delta,
        level,
    };
    let (h, x) = thresholds(regime, p, steps, delta, level, drift.is_some());
    let conc = concentration(&part).evaluate(h);
    let drift_term = match (drift, x) {
        (Some(m), Some(x)) => m.evaluate(x),
        _ => 0.0,
    };
    let mut cert = Certificate {
        regime,
        epsilon,
        horizon,
        p,
        steps,
        delta,
        level,
        concentration_threshold: h,
        drift_threshold: x,
        term_concentration: 0.0,
        term_drift: 0.0,
        total: 1.0,
        vacuous: true,
        constants_mode: ConstantsMode::Explicit,
        confidence: None,
        envelope: None,
        provenance: Vec::new(),
    };
    cert.set_terms(conc, drift_term);
    Ok(cert)
}

/// Minimise the composed bound over `p ∈ p_values` and the `δ` grid, with
/// `N = ⌊T/δ⌋`. Ties go to the smaller `N`, then the smaller `δ`.
pub fn certify_general(
    epsilon: f64,
    horizon: f64,
    regime: Regime,
    concentration: &ConcentrationFactory,
    level_rule: &LevelRule,
    drift: Option<&TailModel>,
    search: &SearchConfig,
) -> Result<Certificate> {
    if !(epsilon > 0.0 && horizon > 0.0) {
        return Err(invalid("epsilon and horizon must be positive"));
    }
    if let Regime::Holder { beta } = regime {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(invalid(format!(
                "Hölder exponent must lie in (0,1), got {beta}"
            )));
        }
    }
    if let Some(d) = drift {
        d.validate()?;
    }
    let deltas = search.deltas(horizon);
    let candidates: Vec<(f64, f64)> = search
        .p_values
        .iter()
        .flat_map(|&p| deltas.iter().map(move |&d| (p, d)))
        .collect();
    if candidates.is_empty() {
        return Err(invalid("empty search space"));
    }
    let outcomes: Vec<Outcome> = candidates
        .par_iter()
        .map(|&(p, delta)| {
            match evaluate_tuple(
                epsilon,
                horizon,
                regime,
                p,
                delta,
                concentration,
                level_rule,
                drift,
            ) {
                Ok(c) => Outcome::Feasible(c),
                Err(r) => Outcome::Violated(r),
            }
        })
        .collect();

    let mut best: Option<Certificate> = None;
    let mut least_violation = f64::INFINITY;
    for o in outcomes {
        match o {
            Outcome::Feasible(c) => {
                let better = match &best {
                    None => true,
                    Some(b) => (c.total, c.steps, c.delta) < (b.total, b.steps, b.delta),
                };
                if better {
                    best = Some(c);
                }
            }
            Outcome::Violated(r) => least_violation = least_violation.min(r),
        }
    }
    match best {
        Some(mut c) => {
            c.provenance.push(format!(
                "search: p in {:?}, {} steps around {:e}",
                search.p_values,
                deltas.len(),
                search.delta_seed.unwrap_or(horizon / 100.0)
            ));
            Ok(c)
        }
        None => Err(Error::Infeasible(Infeasibility {
            constraint: constraint_label(regime).to_string(),
            ratio: least_violation,
        })),
    }
}
