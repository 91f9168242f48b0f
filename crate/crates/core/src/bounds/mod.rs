//! Certificates: explicit upper bounds for `P(‖y‖ ≤ ε)`.
//!
//! Every composition theorem has the same shape. For a partition of `[0,T]`
//! into `N` steps of size `δ` and a level `I` tied to `ε` by a feasibility
//! constraint,
//!
//! `P(‖y‖ ≤ ε) ≤ P(||X|_p − I| ≥ h) + P(‖a‖ ≥ x)`
//!
//! with `h = I/4` (or `I/2` without drift) and a drift threshold `x` that
//! depends on the norm.

mod closed_form;
mod empirical;
mod representation;
mod search;

use serde::{Deserialize, Serialize};

pub use closed_form::{
    bound_fbm_holder_norm, bound_gaussian_class, bound_holder_indep, bound_iid_sum,
    bound_stationary, certify_iid_sum, gaussian_delta_seed, GaussianClassProblem, HolderIndepBound,
    IidMode, StationaryBound,
};
pub use empirical::{empirical_certificate, EmpiricalProblem, PartitionSamples};
pub use representation::{representation_feasibility, theta_threshold, FeasibilityWitness};
pub use search::{certify_general, ConcentrationFactory, LevelRule, Partition, SearchConfig};

/// Norm in which the small ball is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Regime {
    /// Supremum norm; drift measured by `‖a‖∞`.
    Sup,
    /// Supremum norm; drift measured by `‖a‖_{L¹}`. Requires `p ≥ 1`.
    L1,
    /// `β`-Hölder norm; drift measured by `‖a‖∞`.
    Holder { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsMode {
    /// Constants as printed in the source result.
    Paper,
    /// Constants traced through the proof.
    #[default]
    Explicit,
    /// Terms estimated from samples, valid at a stated confidence.
    Statistical,
}

/// Closed-form majorant `prefactor · exp(−rate · ε^{−exponent})` of the
/// concentration term, valid for the certificate's `ε` and horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEnvelope {
    pub prefactor: f64,
    pub rate: f64,
    pub exponent: f64,
}

impl RateEnvelope {
    pub fn value(&self, epsilon: f64) -> f64 {
        self.prefactor * (-self.rate * epsilon.powf(-self.exponent)).exp()
    }
}

/// A fully explicit upper bound for a small-ball probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub regime: Regime,
    pub epsilon: f64,
    pub horizon: f64,
    pub p: f64,
    pub steps: usize,
    pub delta: f64,
    /// The centering level `I`.
    pub level: f64,
    pub concentration_threshold: f64,
    /// `None` when the process has no drift.
    pub drift_threshold: Option<f64>,
    pub term_concentration: f64,
    pub term_drift: f64,
    /// `min(1, term_concentration + term_drift)`.
    pub total: f64,
    /// The unclamped sum reached 1.
    pub vacuous: bool,
    pub constants_mode: ConstantsMode,
    /// Confidence at which a statistical certificate holds.
    pub confidence: Option<f64>,
    pub envelope: Option<RateEnvelope>,
    pub provenance: Vec<String>,
}

impl Certificate {
    /// The trivial bound `P ≤ 1`, used where no tuple is feasible.
    pub fn trivial(regime: Regime, epsilon: f64, horizon: f64, reason: impl Into<String>) -> Self {
        Self {
            regime,
            epsilon,
            horizon,
            p: f64::NAN,
            steps: 0,
            delta: f64::NAN,
            level: f64::NAN,
            concentration_threshold: f64::NAN,
            drift_threshold: None,
            term_concentration: 1.0,
            term_drift: 0.0,
            total: 1.0,
            vacuous: true,
            constants_mode: ConstantsMode::Explicit,
            confidence: None,
            envelope: None,
            provenance: vec![reason.into()],
        }
    }

    pub(crate) fn set_terms(&mut self, concentration: f64, drift: f64) {
        self.term_concentration = concentration;
        self.term_drift = drift;
        let sum = concentration + drift;
        self.vacuous = sum >= 1.0;
        self.total = sum.min(1.0);
    }
}

/// `(lhs, rhs)` of the level constraint of a regime.
fn level_constraint(
    regime: Regime,
    p: f64,
    steps: usize,
    delta: f64,
    level: f64,
    epsilon: f64,
) -> (f64, f64) {
    let root = (steps as f64).powf(1.0 / p);
    let lhs = match regime {
        Regime::Sup => 4.0 * root,
        Regime::L1 => 8.0 * root,
        Regime::Holder { beta } => 2.0 * delta.powf(beta) * root,
    };
    (lhs, level / epsilon)
}

pub(crate) fn constraint_label(regime: Regime) -> &'static str {
    match regime {
        Regime::Sup => "4 N^(1/p) <= I/eps",
        Regime::L1 => "8 N^(1/p) <= I/eps",
        Regime::Holder { .. } => "2 delta^beta N^(1/p) <= I/eps",
    }
}

const HORIZON_TOL: f64 = 1e-12;

/// Membership of `(N, δ, I)` in the feasible set of `regime` at level `ε`.
pub fn feasible(
    regime: Regime,
    p: f64,
    steps: usize,
    delta: f64,
    level: f64,
    epsilon: f64,
    horizon: f64,
) -> bool {
    if regime == Regime::L1 && p < 1.0 {
        return false;
    }
    let (lhs, rhs) = level_constraint(regime, p, steps, delta, level, epsilon);
    lhs <= rhs && steps as f64 * delta <= horizon * (1.0 + HORIZON_TOL)
}

/// Concentration threshold `h` and drift threshold `x` for a feasible tuple.
pub fn thresholds(
    regime: Regime,
    p: f64,
    steps: usize,
    delta: f64,
    level: f64,
    with_drift: bool,
) -> (f64, Option<f64>) {
    if !with_drift {
        return (level / 2.0, None);
    }
    let x = match regime {
        Regime::Sup | Regime::Holder { .. } => {
            level * (steps as f64).powf(-1.0 / p) / (4.0 * delta)
        }
        Regime::L1 => level / 8.0,
    };
    (level / 4.0, Some(x))
}
