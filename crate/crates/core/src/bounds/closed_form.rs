//! Closed-form bound families: i.i.d. sums, Hölder processes with
//! independent increments, the Gaussian class `X^(H,β)`, stationary
//! increments, and the Hölder norm of fBm.

use serde::{Deserialize, Serialize};

use super::search::{certify_general, steps_in, Partition, SearchConfig};
use super::{Certificate, ConstantsMode, RateEnvelope, Regime};
use crate::concentration::{hoeffding_tail, CenteringChoice, TailModel};
use crate::error::{invalid, Error, Infeasibility, Result};
use crate::gauss::{class_two_norm_bound, gamma_two_norm_bound, row_sum_envelope, ClassParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IidMode {
    /// `2 exp(−n m² / (4R²))`, the constant as printed.
    PaperConstants,
    /// Hoeffding with `t = n m / 2` and ranges `R`: `2 exp(−n m² / (2R²))`.
    #[default]
    Sharp,
}

/// Bound on `P(max_{k≤n} |S_k| ≤ ε)` for i.i.d. summands with `E|Z| = m`
/// and `|Z| ≤ R`, valid for `ε ≤ m/4`.
pub fn bound_iid_sum(
    n: usize,
    mean_abs: f64,
    range_bound: f64,
    epsilon: f64,
    mode: IidMode,
) -> Result<f64> {
    if n == 0 || !(mean_abs > 0.0) || !(range_bound > 0.0) || !(epsilon > 0.0) {
        return Err(invalid("need n >= 1 and positive mean, range and epsilon"));
    }
    let limit = mean_abs / 4.0;
    if epsilon > limit {
        return Err(Error::EpsilonTooLarge { epsilon, limit });
    }
    let nf = n as f64;
    Ok(match mode {
        IidMode::PaperConstants => {
            (2.0 * (-nf * mean_abs * mean_abs / (4.0 * range_bound * range_bound)).exp()).min(1.0)
        }
        IidMode::Sharp => hoeffding_tail(&vec![range_bound; n], nf * mean_abs / 2.0),
    })
}

/// [`bound_iid_sum`] as a certificate on the unit-step grid `0, 1, …, n`:
/// `p = δ = 1`, `I = n E|Z|`.
pub fn certify_iid_sum(
    n: usize,
    mean_abs: f64,
    range_bound: f64,
    epsilon: f64,
    mode: IidMode,
) -> Result<Certificate> {
    let value = bound_iid_sum(n, mean_abs, range_bound, epsilon, mode)?;
    let level = n as f64 * mean_abs;
    let mut cert = Certificate::trivial(Regime::Sup, epsilon, n as f64, "");
    cert.p = 1.0;
    cert.steps = n;
    cert.delta = 1.0;
    cert.level = level;
    cert.concentration_threshold = level / 2.0;
    cert.constants_mode = match mode {
        IidMode::PaperConstants => ConstantsMode::Paper,
        IidMode::Sharp => ConstantsMode::Explicit,
    };
    cert.provenance = vec![format!(
        "i.i.d. sum n={n}, E|Z|={mean_abs}, |Z|<={range_bound}; Hoeffding on |S|_1 at I/2 ({mode:?})"
    )];
    cert.set_terms(value, 0.0);
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderIndepBound {
    /// Rate exponent `(1 + 2H − 2β)/β`.
    pub gamma: f64,
    /// `C` in `2 exp(−C T ε^{−γ})`.
    pub constant: f64,
    pub value: f64,
    /// `γ ≤ 0`: the bound does not decay as `ε → 0`.
    pub useless: bool,
}

/// `P(‖X‖∞ ≤ ε) ≤ 2 exp(−C T ε^{−γ})` for a process with independent
/// increments, a.s. Hölder constant at most `holder_bound` (exponent `H`)
/// and `E|X_t − X_s| ≥ c_inc |t − s|^β`.
pub fn bound_holder_indep(
    hurst: f64,
    beta: f64,
    horizon: f64,
    epsilon: f64,
    holder_bound: f64,
    c_inc: f64,
) -> Result<HolderIndepBound> {
    if !(hurst > 0.0 && hurst <= beta && beta < 1.0) {
        return Err(invalid(format!(
            "need 0 < H <= beta < 1, got H={hurst}, beta={beta}"
        )));
    }
    if !(epsilon > 0.0) || !(horizon > 0.0) {
        return Err(invalid("need epsilon > 0 and a positive horizon"));
    }
    if epsilon >= 1.0 {
        return Err(Error::EpsilonTooLarge {
            epsilon,
            limit: 1.0,
        });
    }
    if !(holder_bound > 0.0 && c_inc > 0.0) {
        return Err(invalid("constants must be positive"));
    }
    let gamma = (1.0 + 2.0 * hurst - 2.0 * beta) / beta;
    let constant = c_inc * c_inc / (8.0 * holder_bound * holder_bound) * (4.0 / c_inc).powf(-gamma);
    // the partition step (4ε/c)^{1/β} must fit in the horizon
    let step = (4.0 * epsilon / c_inc).powf(1.0 / beta);
    let value = if step > horizon {
        1.0
    } else {
        (2.0 * (-constant * horizon * epsilon.powf(-gamma)).exp()).min(1.0)
    };
    Ok(HolderIndepBound {
        gamma,
        constant,
        value,
        useless: gamma <= 0.0,
    })
}

/// `δ₀ = (4ε/√c)^{1/β}`: the smallest step at which `I = √(cN) δ^β`
/// satisfies `4√N ε ≤ I`.
pub fn gaussian_delta_seed(class: &ClassParams, epsilon: f64) -> f64 {
    (4.0 * epsilon / class.c_lower.sqrt()).powf(1.0 / class.beta)
}

/// Inputs of [`bound_gaussian_class`].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianClassProblem {
    pub class: ClassParams,
    pub horizon: f64,
    pub epsilon: f64,
    /// Tail model of `‖a‖∞`; `None` for a process without drift.
    pub drift: Option<TailModel>,
    /// Simulation step the partition must nest in.
    pub lattice: Option<f64>,
}

/// Smallest admissible step at or just above `delta`. The level constraint
/// holds with equality at `δ₀`, so the step is raised by a relative `10⁻¹²`
/// to keep it satisfied in floating point.
fn snap_up(delta: f64, lattice: Option<f64>) -> f64 {
    let delta = delta * (1.0 + 1e-12);
    match lattice {
        None => delta,
        Some(l) => (delta / l).ceil().max(1.0) * l,
    }
}

fn infeasible(constraint: &str, ratio: f64) -> Error {
    Error::Infeasible(Infeasibility {
        constraint: constraint.to_string(),
        ratio,
    })
}

/// Certificate for `X ∈ X^(H,β)` in the supremum norm, with `p = 2`,
/// `I = √(cN) δ^β ≤ √(E‖Y‖₂²)` and `‖Γ‖₂` bounded from the class constants.
///
/// The concentration term is replaced by its exact power-law majorant
/// `2 exp(−C₂ ε^{−γ})`, with `γ = (1+2H−2β)/β` for `H ≤ ½` and
/// `γ = (2−2β)/β` for `H > ½`; the value at the chosen tuple is kept in the
/// provenance. Without a usable majorant (partition forced far above `δ₀`
/// by the lattice) the tuple value is reported.
pub fn bound_gaussian_class(problem: &GaussianClassProblem) -> Result<Certificate> {
    let GaussianClassProblem {
        class,
        horizon,
        epsilon,
        ref drift,
        lattice,
    } = *problem;
    class.validate()?;
    if !(epsilon > 0.0) || !(horizon > 0.0) {
        return Err(invalid("need epsilon > 0 and a positive horizon"));
    }
    if epsilon >= 1.0 {
        return Err(Error::EpsilonTooLarge {
            epsilon,
            limit: 1.0,
        });
    }
    let seed = gaussian_delta_seed(&class, epsilon);
    let delta = snap_up(seed, lattice);
    if delta > horizon * (1.0 + 1e-12) {
        return Err(infeasible("N delta <= T with N >= 1", delta / horizon));
    }
    let conc = |part: &Partition| TailModel::GaussL2 {
        norm2: class_two_norm_bound(&class, part.steps, part.delta),
        centering: CenteringChoice::SqrtSecondMoment,
    };
    let level = |_: f64, n: usize, d: f64| (class.c_lower * n as f64).sqrt() * d.powf(class.beta);
    let search = SearchConfig {
        p_values: vec![2.0],
        points_per_decade: 1,
        decades: 0.0,
        delta_seed: Some(delta),
        lattice: None,
    };
    let mut cert = certify_general(
        epsilon,
        horizon,
        Regime::Sup,
        &conc,
        &level,
        drift.as_ref(),
        &search,
    )?;
    cert.provenance.clear();
    cert.provenance.push(format!(
        "class H={}, beta={}, c={}, C={}, c'={}; delta0=(4 eps/sqrt c)^(1/beta)={seed:e}",
        class.hurst, class.beta, class.c_lower, class.c_upper, class.c_deriv
    ));
    cert.provenance.push(
        "I = sqrt(c N) delta^beta <= sqrt(E|Y|_2^2); concentration 2exp(-h^2/(4|G|_2)) with |G|_2 <= delta^(2H) max_j sum_k b(|k-j|)".into(),
    );
    let stretch = if lattice.is_some() { 2.0 } else { 1.0 };
    if delta <= stretch * seed * (1.0 + 1e-9) {
        let env = gaussian_envelope(&class, horizon, seed, stretch, drift.is_some());
        let tuple = cert.term_concentration;
        let bound = env.value(epsilon);
        debug_assert!(
            bound >= tuple * (1.0 - 1e-9),
            "envelope {bound} below tuple {tuple}"
        );
        cert.provenance.push(format!(
            "concentration term at (N={}, delta={:e}) is {tuple:e}; reported as 2exp(-{:e} eps^-{})",
            cert.steps, cert.delta, env.rate, env.exponent
        ));
        let drift_term = cert.term_drift;
        cert.set_terms(bound, drift_term);
        cert.envelope = Some(env);
    } else {
        cert.provenance
            .push("lattice step exceeds 2 delta0: tuple value reported".into());
    }
    Ok(cert)
}

/// Power-law majorant of the concentration term for steps in
/// `[δ₀, stretch·δ₀]` with `N = ⌊T/δ⌋ ≥ T/(2δ)`.
fn gaussian_envelope(
    class: &ClassParams,
    horizon: f64,
    seed: f64,
    stretch: f64,
    with_drift: bool,
) -> RateEnvelope {
    let (h, b, c) = (class.hurst, class.beta, class.c_lower);
    // exponent h²/(4‖Γ‖₂) with h = I/2 (no drift) or I/4
    let q = if with_drift { 64.0 } else { 16.0 };
    let worst = |e: f64| if e < 0.0 { stretch.powf(e) } else { 1.0 };
    let scale = |e: f64| (4.0 / c.sqrt()).powf(e / b);
    if h <= 0.5 {
        let k = row_sum_envelope(class, steps_in(horizon, seed));
        let e = 2.0 * b - 2.0 * h - 1.0;
        RateEnvelope {
            prefactor: 2.0,
            rate: c * horizon * worst(e) * scale(e) / (2.0 * q * k),
            exponent: -e / b,
        }
    } else {
        let k = row_sum_envelope(class, 1);
        let e = 2.0 * b - 2.0;
        RateEnvelope {
            prefactor: 2.0,
            rate: c * (horizon / 2.0).powf(2.0 - 2.0 * h) * worst(e) * scale(e) / (q * k),
            exponent: -e / b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryBound {
    /// `σ^{−1}(4ε)`.
    pub delta_star: f64,
    /// `C₂ = 1/(32 sup f · C²)`.
    pub rate: f64,
    pub value: f64,
}

/// Bound for stationary increments with `σ(δ) = √σ²(δ)` increasing on
/// `(0, Δ)`, `σ(Tδ)/σ(δ) ≤ ratio_bound` and spectral density bounded by
/// `symbol_sup`: `2 exp(−C₂ T / σ^{−1}(4ε))`.
pub fn bound_stationary(
    sigma: &dyn Fn(f64) -> f64,
    delta_max: f64,
    ratio_bound: f64,
    symbol_sup: f64,
    horizon: f64,
    epsilon: f64,
) -> Result<StationaryBound> {
    if !(delta_max > 0.0 && ratio_bound > 0.0 && symbol_sup > 0.0 && horizon > 0.0 && epsilon > 0.0)
    {
        return Err(invalid("all arguments must be positive"));
    }
    if !symbol_sup.is_finite() {
        return Err(invalid("spectral density must be bounded"));
    }
    let target = 4.0 * epsilon;
    let top = sigma(delta_max);
    if target >= top {
        return Err(Error::EpsilonTooLarge {
            epsilon,
            limit: top / 4.0,
        });
    }
    let (mut lo, mut hi) = (0.0, delta_max);
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if sigma(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rate = 1.0 / (32.0 * symbol_sup * ratio_bound * ratio_bound);
    let value = if hi > horizon {
        1.0
    } else {
        (2.0 * (-rate * horizon / hi).exp()).min(1.0)
    };
    Ok(StationaryBound {
        delta_star: hi,
        rate,
        value,
    })
}

/// Certificate for `P(‖B^H‖_β ≤ ε)` on `[0,1]`, `0 < β < H < ½`, through the
/// Hölder regime with `δ = (2ε)^{1/(H−β)}`, `I = √N δ^H`. The concentration
/// term is reported as `2 exp(−C₂ ε^{−1/(H−β)})`.
pub fn bound_fbm_holder_norm(
    hurst: f64,
    beta: f64,
    epsilon: f64,
    c_deriv: f64,
    lattice: Option<f64>,
) -> Result<Certificate> {
    if !(beta > 0.0 && beta < hurst) {
        return Err(invalid(format!(
            "need 0 < beta < H, got beta={beta}, H={hurst}"
        )));
    }
    if !(hurst < 0.5) {
        return Err(invalid(format!("need H < 1/2, got {hurst}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) || !(c_deriv >= 0.0) {
        return Err(invalid("need epsilon > 0 and c_deriv >= 0"));
    }
    let horizon = 1.0;
    let seed = (2.0 * epsilon).powf(1.0 / (hurst - beta));
    let delta = snap_up(seed, lattice);
    if delta > horizon {
        return Err(infeasible("N delta <= T with N >= 1", delta / horizon));
    }
    let conc = |part: &Partition| TailModel::GaussL2 {
        norm2: gamma_two_norm_bound(hurst, part.steps, part.delta, c_deriv, 1.0),
        centering: CenteringChoice::SqrtSecondMoment,
    };
    let level = |_: f64, n: usize, d: f64| (n as f64).sqrt() * d.powf(hurst);
    let search = SearchConfig {
        p_values: vec![2.0],
        points_per_decade: 1,
        decades: 0.0,
        delta_seed: Some(delta),
        lattice: None,
    };
    let regime = Regime::Holder { beta };
    let mut cert = certify_general(epsilon, horizon, regime, &conc, &level, None, &search)?;
    cert.provenance.clear();
    cert.provenance.push(format!(
        "fBm H={hurst}, Hoelder beta={beta}; delta0=(2 eps)^(1/(H-beta))={seed:e}; I = sqrt(N) delta^H"
    ));
    let stretch = if lattice.is_some() { 2.0 } else { 1.0 };
    if delta <= stretch * seed * (1.0 + 1e-9) {
        // N δ^{2H} / (16 K δ^{2H}) ≥ 1/(32 K δ) ≥ 1/(32 K stretch δ₀)
        let k = 1.0 + 2.0 * c_deriv / (2.0 * hurst * (1.0 - 2.0 * hurst));
        let gamma = 1.0 / (hurst - beta);
        let env = RateEnvelope {
            prefactor: 2.0,
            rate: 2f64.powf(-gamma) / (32.0 * k * stretch),
            exponent: gamma,
        };
        let tuple = cert.term_concentration;
        let bound = env.value(epsilon);
        debug_assert!(
            bound >= tuple * (1.0 - 1e-9),
            "envelope {bound} below tuple {tuple}"
        );
        cert.provenance.push(format!(
            "concentration term at (N={}, delta={:e}) is {tuple:e}; reported as 2exp(-{:e} eps^-{gamma})",
            cert.steps, cert.delta, env.rate
        ));
        cert.set_terms(bound, 0.0);
        cert.envelope = Some(env);
    }
    Ok(cert)
}
