//! Incremental variance functions `σ²(s,t) = E[(X_t − X_s)²]` and the
//! class parameters `(H, β, c, C)` of the Gaussian class they belong to.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Constants of the class `X^(H,β)`:
/// `c_lower |t−s|^{2β} ≤ σ²(s,t) ≤ c_upper |t−s|^{2H}` and
/// `|∂s∂t σ²(s,t)| ≤ 2 c_deriv |t−s|^{2H−2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub hurst: f64,
    pub beta: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub c_deriv: f64,
}

impl ClassParams {
    /// Parameters of fractional Brownian motion: `β = H`, `c = C = 1`,
    /// `|∂s∂t |t−s|^{2H}| = 2H|2H−1| |t−s|^{2H−2}`.
    pub fn fbm(hurst: f64) -> Self {
        Self {
            hurst,
            beta: hurst,
            c_lower: 1.0,
            c_upper: 1.0,
            c_deriv: hurst * (2.0 * hurst - 1.0).abs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.hurst > 0.0
            && self.hurst < 1.0
            && self.beta >= self.hurst
            && self.beta < 1.0
            && self.c_lower > 0.0
            && self.c_upper >= self.c_lower
            && self.c_deriv >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid class parameters {self:?}")))
        }
    }
}

type VarianceFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Fbm {
        hurst: f64,
    },
    /// Independent sum `Σ w_i B^{H_i}` scaled so that `σ² = Σ w_i² |t−s|^{2H_i}`.
    MixedFbm {
        components: Vec<(f64, f64)>,
    },
    Custom {
        f: Arc<VarianceFn>,
        stationary: bool,
    },
}

/// An incremental variance function with optional analytic class metadata.
#[derive(Clone)]
pub struct IncrementalVariance {
    kind: Kind,
    class: Option<ClassParams>,
}

impl fmt::Debug for IncrementalVariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Fbm { hurst } => write!(f, "IncrementalVariance::Fbm(H={hurst})"),
            Kind::MixedFbm { components } => {
                write!(f, "IncrementalVariance::MixedFbm({components:?})")
            }
            Kind::Custom { stationary, .. } => {
                write!(f, "IncrementalVariance::Custom(stationary={stationary})")
            }
        }
    }
}

fn check_hurst(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("H must lie in (0,1), got {h}")))
    }
}

impl IncrementalVariance {
    pub fn fbm(hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        Ok(Self {
            kind: Kind::Fbm { hurst },
            class: Some(ClassParams::fbm(hurst)),
        })
    }

    pub fn brownian() -> Self {
        Self::fbm(0.5).expect("H = 1/2 is valid")
    }

    /// `σ²(s,t) = Σ w_i |t−s|^{2H_i}` for components `(w_i, H_i)`, `w_i > 0`.
    /// Class metadata depends on the horizon and is available through
    /// [`IncrementalVariance::class_on`].
    pub fn mixed_fbm(components: Vec<(f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(invalid("mixed fBm needs at least one component"));
        }
        for &(w, h) in &components {
            check_hurst(h)?;
            if !(w > 0.0 && w.is_finite()) {
                return Err(invalid(format!("mixture weight must be positive, got {w}")));
            }
        }
        Ok(Self {
            kind: Kind::MixedFbm { components },
            class: None,
        })
    }

    /// Arbitrary variance function. `stationary` asserts that `σ²(s,t)`
    /// depends on `|t−s|` only, which enables Toeplitz structure.
    pub fn custom<F>(f: F, stationary: bool, class: Option<ClassParams>) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Custom {
                f: Arc::new(f),
                stationary,
            },
            class,
        }
    }

    pub fn sigma2(&self, s: f64, t: f64) -> f64 {
        let d = (t - s).abs();
        match &self.kind {
            Kind::Fbm { hurst } => d.powf(2.0 * hurst),
            Kind::MixedFbm { components } => {
                components.iter().map(|(w, h)| w * d.powf(2.0 * h)).sum()
            }
            Kind::Custom { f, .. } => {
                if s == t {
                    0.0
                } else {
                    f(s.min(t), s.max(t))
                }
            }
        }
    }

    pub fn is_stationary(&self) -> bool {
        match &self.kind {
            Kind::Fbm { .. } | Kind::MixedFbm { .. } => true,
            Kind::Custom { stationary, .. } => *stationary,
        }
    }

    /// True for the closed-form kinds, whose covariance matrices are
    /// positive semidefinite by construction.
    pub(crate) fn is_analytic(&self) -> bool {
        !matches!(self.kind, Kind::Custom { .. })
    }

    /// Analytic class metadata that does not depend on the horizon.
    pub fn class(&self) -> Option<ClassParams> {
        self.class
    }

    /// Class metadata valid on `[0, horizon]`.
    pub fn class_on(&self, horizon: f64) -> Option<ClassParams> {
        match &self.kind {
            Kind::MixedFbm { components } => {
                // roughest component sets H and β; the others are dominated on |t-s| ≤ T
                let &(w0, h0) = components
                    .iter()
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("nonempty");
                let c_upper = components
                    .iter()
                    .map(|(w, h)| w * horizon.powf(2.0 * (h - h0)))
                    .sum();
                let c_deriv = components
                    .iter()
                    .map(|(w, h)| w * h * (2.0 * h - 1.0).abs() * horizon.powf(2.0 * (h - h0)))
                    .sum();
                Some(ClassParams {
                    hurst: h0,
                    beta: h0,
                    c_lower: w0,
                    c_upper,
                    c_deriv,
                })
            }
            _ => self.class,
        }
    }

    /// `(w_i, H_i)` when `σ² = Σ w_i |t−s|^{2H_i}`.
    pub(crate) fn power_components(&self) -> Option<Vec<(f64, f64)>> {
        match &self.kind {
            Kind::Fbm { hurst } => Some(vec![(1.0, *hurst)]),
            Kind::MixedFbm { components } => Some(components.clone()),
            Kind::Custom { .. } => None,
        }
    }

    /// Hurst index of the single-component fBm kind.
    pub fn fbm_hurst(&self) -> Option<f64> {
        match self.kind {
            Kind::Fbm { hurst } => Some(hurst),
            _ => None,
        }
    }
}

/// `σ²(s,t) = |t−s|^{2H}` of fractional Brownian motion.
pub fn sigma2_fbm(hurst: f64) -> Result<IncrementalVariance> {
    IncrementalVariance::fbm(hurst)
}

/// Empirical class parameters read off `σ²(0,δ)` on a grid of lags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassEstimate {
    pub hurst: f64,
    pub beta: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    /// Least-squares slope of `log σ²` against `log δ`, halved.
    pub regression_exponent: f64,
}

/// Estimate `(H, β, c, C)` from `σ²(0,δ)` for the lags in `deltas`.
///
/// `H` is half the smallest local log–log slope (the upper envelope
/// `C δ^{2H}` must hold down to the smallest lag), `β` half the largest;
/// the constants are the tightest envelope constants on the grid.
pub fn estimate_class_parameters(
    iv: &IncrementalVariance,
    deltas: &[f64],
) -> Result<ClassEstimate> {
    if deltas.len() < 3 {
        return Err(invalid("need at least three lags"));
    }
    let mut ds: Vec<f64> = deltas.to_vec();
    ds.sort_by(f64::total_cmp);
    if ds[0] <= 0.0 {
        return Err(invalid("lags must be positive"));
    }
    if ds[ds.len() - 1] / ds[0] < 100.0 * (1.0 - 1e-12) {
        return Err(invalid("lag grid must span at least two decades"));
    }
    let mut pts = Vec::with_capacity(ds.len());
    for &d in &ds {
        let v = iv.sigma2(0.0, d);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::DegenerateProcess(format!("σ²(0,{d}) = {v}")));
        }
        pts.push((d.ln(), v.ln()));
    }
    let slopes: Vec<f64> = pts
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let hurst = 0.5 * slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let beta = 0.5 * slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c_upper = pts
        .iter()
        .map(|(x, y)| (y - 2.0 * hurst * x).exp())
        .fold(f64::NEG_INFINITY, f64::max);
    let c_lower = pts
        .iter()
        .map(|(x, y)| (y - 2.0 * beta * x).exp())
        .fold(f64::INFINITY, f64::min);

    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();

    Ok(ClassEstimate {
        hurst,
        beta,
        c_lower,
        c_upper,
        regression_exponent: 0.5 * sxy / sxx,
    })
}

/// `n` log-spaced lags from `lo` to `hi`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}
