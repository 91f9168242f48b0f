//! Parameter feasibility for representing a Hölder-continuous terminal value
//! as a pathwise integral against `X ∈ X^(H,β)`, `H > ½`.
//!
//! With `Q = β(1−H)/(1−β)` the construction needs `η ∈ (1−H, ½)` and
//!
//! 1. `μ + ϑ > Q`
//! 2. `γ H > Q`
//! 3. `κ > Q`
//! 4. `1 − η − μ > 0`
//! 5. `2 − η − κ > 0`
//! 6. `1 + H − η − μ − κ > 0`

use serde::Serialize;

const SLACK_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityWitness {
    pub hurst: f64,
    pub beta: f64,
    pub theta: f64,
    pub mu: f64,
    pub gamma_repr: f64,
    pub kappa: f64,
    pub eta: f64,
    pub feasible: bool,
    /// Smallest margin over the six inequalities and the bounds on `η`.
    pub slack: f64,
    /// First violated hypothesis when infeasible.
    pub reason: Option<String>,
}

impl FeasibilityWitness {
    /// Margins of inequalities (1)–(6), then `η − (1−H)` and `½ − η`.
    pub fn margins(&self) -> [f64; 8] {
        margins(
            self.hurst,
            self.beta,
            self.theta,
            self.mu,
            self.gamma_repr,
            self.kappa,
            self.eta,
        )
    }
}

fn q_of(hurst: f64, beta: f64) -> f64 {
    beta * (1.0 - hurst) / (1.0 - beta)
}

#[allow(clippy::too_many_arguments)]
fn margins(h: f64, b: f64, theta: f64, mu: f64, gamma: f64, kappa: f64, eta: f64) -> [f64; 8] {
    let q = q_of(h, b);
    [
        mu + theta - q,
        gamma * h - q,
        kappa - q,
        1.0 - eta - mu,
        2.0 - eta - kappa,
        1.0 + h - eta - mu - kappa,
        eta - (1.0 - h),
        0.5 - eta,
    ]
}

/// Lower bound on the Hölder order `ϑ` of the terminal value:
/// `max(2Q − 2H, Q − H)`.
pub fn theta_threshold(hurst: f64, beta: f64) -> f64 {
    let q = q_of(hurst, beta);
    (2.0 * q - 2.0 * hurst).max(q - hurst)
}

/// Check the hypotheses and, when they hold, exhibit parameters satisfying
/// all six inequalities strictly: `η = 1−H+s`, `μ = max(Q−ϑ, 0)+s`,
/// `κ = Q+s`, `γ = Q/H + 1`, with `s` on a `10⁻³` grid maximizing the
/// smallest margin.
pub fn representation_feasibility(hurst: f64, beta: f64, theta: f64) -> FeasibilityWitness {
    let mut w = FeasibilityWitness {
        hurst,
        beta,
        theta,
        mu: f64::NAN,
        gamma_repr: f64::NAN,
        kappa: f64::NAN,
        eta: f64::NAN,
        feasible: false,
        slack: f64::NEG_INFINITY,
        reason: None,
    };
    let fail = |mut w: FeasibilityWitness, reason: String| {
        w.reason = Some(reason);
        w
    };
    if !(hurst > 0.0 && hurst < 1.0 && beta > 0.0 && beta < 1.0 && theta > 0.0) {
        return fail(w, "need H, beta in (0,1) and theta > 0".into());
    }
    if hurst <= 0.5 {
        return fail(w, format!("H = {hurst} must exceed 1/2"));
    }
    let beta_max = 3.0 * hurst / (hurst + 2.0);
    if beta >= beta_max {
        return fail(
            w,
            format!("beta = {beta} must be below 3H/(H+2) = {beta_max}"),
        );
    }
    let q = q_of(hurst, beta);
    if theta <= 2.0 * q - 2.0 * hurst {
        return fail(
            w,
            format!(
                "theta = {theta} must exceed 2Q - 2H = {}",
                2.0 * q - 2.0 * hurst
            ),
        );
    }
    if theta <= q - hurst {
        return fail(
            w,
            format!("theta = {theta} must exceed Q - H = {}", q - hurst),
        );
    }
    let base_mu = (q - theta).max(0.0);
    let gamma = q / hurst + 1.0;
    let mut best: Option<(f64, f64)> = None;
    for k in 1..1000 {
        let s = k as f64 * SLACK_STEP;
        let m = margins(
            hurst,
            beta,
            theta,
            base_mu + s,
            gamma,
            q + s,
            1.0 - hurst + s,
        );
        let slack = m.iter().cloned().fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(_, b)| slack > b) {
            best = Some((s, slack));
        }
    }
    let (s, slack) = best.expect("nonempty grid");
    w.mu = base_mu + s;
    w.kappa = q + s;
    w.eta = 1.0 - hurst + s;
    w.gamma_repr = gamma;
    w.slack = slack;
    if slack > 0.0 {
        w.feasible = true;
        w
    } else {
        fail(w, "no positive slack on the parameter grid".into())
    }
}
