//! Monte Carlo estimation of small-ball probabilities, rate fits and
//! certificate validation.

mod estimate;
mod rate;
mod statistical;
mod validate;

pub use estimate::{
    estimate_from_norms, estimate_smallball, norm_samples, spec_digest, NormKind,
    SmallBallEstimate, DEFAULT_CONFIDENCE,
};
pub use rate::{effective_rate_spread, fit_rate, fit_window, FitMode, RateFit};
pub use statistical::statistical_certificates;
pub use validate::{validate, ValidationReport, ValidationRow, Verdict};

/// Shortest round-trip representation, as used in all CSV output;
/// exponent notation outside `[1e-4, 1e16)`.
pub fn csv_number(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "NaN".to_string()
    } else if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
