//! Spectral density (Toeplitz symbol) of fractional Gaussian noise.
//!
//! Convention: `ρ(k) = (1/2π) ∫_{−π}^{π} f(λ) cos(kλ) dλ`, so `(1/2π)∫f = 1`
//! and the eigenvalues of `Toeplitz(ρ_0..ρ_{N−1})` lie in `[inf f, sup f]`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};

/// Default truncation of the aliasing sum.
pub const DEFAULT_TRUNCATION: usize = 1000;

const GL_NODES: [f64; 10] = [
    -0.973_906_528_517_171_7,
    -0.865_063_366_688_984_5,
    -0.679_409_568_299_024_4,
    -0.433_395_394_129_247_2,
    -0.148_874_338_981_631_2,
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 10] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

/// Spectral density of unit-variance fGn, normalized numerically.
#[derive(Debug, Clone)]
pub struct SpectralSymbol {
    hurst: f64,
    truncation: usize,
    scale: f64,
}

/// `sup f` over `[−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SymbolSup {
    Finite(f64),
    /// The density diverges at the origin (`H > ½`).
    Infinite,
}

impl SymbolSup {
    pub fn value(self) -> f64 {
        match self {
            SymbolSup::Finite(v) => v,
            SymbolSup::Infinite => f64::INFINITY,
        }
    }
}

/// Build the fGn symbol `f(λ) ∝ (1 − cos λ) Σ_j |λ + 2πj|^{−1−2H}` with the
/// sum truncated at `|j| ≤ truncation` plus an integral tail correction.
pub fn fgn_symbol(hurst: f64, truncation: usize) -> Result<SpectralSymbol> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(invalid(format!("H must lie in (0,1), got {hurst}")));
    }
    if truncation < 100 {
        return Err(invalid("truncation must be at least 100"));
    }
    let mut symbol = SpectralSymbol {
        hurst,
        truncation,
        scale: 1.0,
    };
    symbol.scale = PI / symbol.integrate(|_| 1.0);
    Ok(symbol)
}

impl SpectralSymbol {
    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Normalization constant multiplying the raw aliasing sum.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn evaluate(&self, lambda: f64) -> Result<f64> {
        if !(lambda.abs() <= PI) {
            return Err(invalid(format!(
                "lambda must lie in [-pi, pi], got {lambda}"
            )));
        }
        Ok(self.scale * self.raw(lambda.abs()))
    }

    /// Unnormalized density at `λ ∈ [0, π]`.
    fn raw(&self, lambda: f64) -> f64 {
        let h = self.hurst;
        let e = -1.0 - 2.0 * h;
        if lambda == 0.0 {
            return match h.partial_cmp(&0.5) {
                Some(std::cmp::Ordering::Less) => 0.0,
                Some(std::cmp::Ordering::Equal) => 0.5,
                _ => f64::INFINITY,
            };
        }
        let two_pi = 2.0 * PI;
        let mut sum = lambda.powf(e);
        for j in 1..=self.truncation {
            let c = two_pi * j as f64;
            sum += (c + lambda).powf(e) + (c - lambda).powf(e);
        }
        let edge = two_pi * (self.truncation as f64 + 0.5);
        sum += ((edge + lambda).powf(-2.0 * h) + (edge - lambda).powf(-2.0 * h)) / (4.0 * PI * h);
        let half = (0.5 * lambda).sin();
        2.0 * half * half * sum
    }

    /// `∫₀^π raw(λ) w(λ) dλ` on panels graded geometrically toward the
    /// origin, with the leading `λ^{1−2H}/2` behaviour integrated exactly on
    /// the innermost interval.
    fn integrate(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut total = 0.0;
        let mut hi = PI;
        let mut panels = 0;
        // uniform panels away from the origin, halving toward it
        while hi > 1e-14 && panels < 200 {
            let lo = if hi > 0.5 {
                (hi - 0.25).max(0.5)
            } else {
                0.5 * hi
            };
            let (mid, rad) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            total += rad
                * GL_NODES
                    .iter()
                    .zip(GL_WEIGHTS)
                    .map(|(x, w)| {
                        let l = mid + rad * x;
                        w * self.raw(l) * weight(l)
                    })
                    .sum::<f64>();
            hi = lo;
            panels += 1;
        }
        let a = 2.0 - 2.0 * self.hurst;
        total + 0.5 * hi.powf(a) / a * weight(0.0)
    }

    /// `(1/π) ∫₀^π f(λ) cos(kλ) dλ`, which reproduces `ρ_H(k)`.
    pub fn fourier_coefficient(&self, lag: usize) -> f64 {
        self.scale / PI * self.integrate(|l| (lag as f64 * l).cos())
    }
}

/// `sup f` from a uniform grid of `points` on `[0, π]`, refined by a golden
/// section search around the best grid point. Infinite for `H > ½`.
pub fn symbol_sup(symbol: &SpectralSymbol, points: usize) -> SymbolSup {
    if symbol.hurst > 0.5 {
        return SymbolSup::Infinite;
    }
    let m = points.max(2);
    let at = |i: usize| PI * i as f64 / (m - 1) as f64;
    let f = |l: f64| symbol.scale * symbol.raw(l);
    let (best, mut best_val) =
        (0..m)
            .map(|i| (i, f(at(i))))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(m - 1)));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best_val = best_val.max(fc).max(fd);
    SymbolSup::Finite(best_val)
}
