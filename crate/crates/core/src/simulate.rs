//! Exact path generation for `X` (fGn/fBm, Brownian motion, generic
//! Gaussian), i.i.d. partial sums, drift processes and `y = X + ∫a`.
//!
//! Every path draws from its own [`SeedSpec`] stream, so a batch of paths is
//! the same no matter how it is split across threads.

use std::cell::RefCell;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use realfft::{ComplexToReal, RealFftPlanner};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{invalid, Error, Result};
use crate::gauss::{fgn_autocovariances, increment_covariance, IncrementalVariance, PSD_TOLERANCE};
use crate::grid::{SamplePath, UniformGrid};
use crate::linalg::symmetric_eigen;
use crate::rng::{SeedSpec, SubStream};

/// Law of the summands of an i.i.d. partial-sum process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Rademacher,
    /// `lo + (hi − lo) B` with `B ~ Beta(alpha, beta)`.
    ScaledBeta {
        lo: f64,
        hi: f64,
        alpha: f64,
        beta: f64,
    },
}

impl DistSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if !(lo < 0.0 && hi > 0.0) {
            return Err(invalid(format!("support [{lo}, {hi}] must straddle 0")));
        }
        if let DistSpec::ScaledBeta { alpha, beta, .. } = *self {
            if !(alpha > 0.0 && beta > 0.0) {
                return Err(invalid("beta shape parameters must be positive"));
            }
        }
        Ok(())
    }

    /// Bounds `c < 0 < d` with `c ≤ Z ≤ d` almost surely.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistSpec::Uniform { lo, hi } | DistSpec::ScaledBeta { lo, hi, .. } => (lo, hi),
            DistSpec::Rademacher => (-1.0, 1.0),
        }
    }

    /// `|c| ∨ |d|`.
    pub fn range_bound(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// Exact `E|Z|`.
    pub fn mean_abs(&self) -> f64 {
        match *self {
            DistSpec::Uniform { lo, hi } => (lo * lo + hi * hi) / (2.0 * (hi - lo)),
            DistSpec::Rademacher => 1.0,
            DistSpec::ScaledBeta {
                lo,
                hi,
                alpha,
                beta,
            } => {
                // E|Z| = −E Z + 2 E[Z; Z > 0], Z = lo + w B
                let w = hi - lo;
                let b0 = -lo / w;
                let mean_b = alpha / (alpha + beta);
                let tail = 1.0 - beta_reg(alpha, beta, b0);
                let tail_first = mean_b * (1.0 - beta_reg(alpha + 1.0, beta, b0));
                -(lo + w * mean_b) + 2.0 * (lo * tail + w * tail_first)
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            DistSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            DistSpec::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistSpec::ScaledBeta {
                lo,
                hi,
                alpha,
                beta,
            } => {
                let b = Beta::new(alpha, beta).expect("validated shape parameters");
                lo + (hi - lo) * b.sample(rng)
            }
        }
    }
}

/// The driving process `X`.
#[derive(Debug, Clone)]
pub enum ProcessKind {
    Fbm { hurst: f64 },
    Brownian,
    GaussianGeneric(IncrementalVariance),
    IidSum(DistSpec),
}

/// The drift `a` in `y = X + ∫a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSpec {
    None,
    Constant {
        level: f64,
    },
    /// `a_t = amplitude · sin(2π frequency t + φ)` with a uniform random phase.
    BoundedWave {
        amplitude: f64,
        frequency: f64,
    },
    /// An fBm independent of `X`.
    FbmDrift {
        #[serde(rename = "H")]
        hurst: f64,
    },
    /// `a_t = X_t`: the drift reuses the randomness of `X`.
    SharedFbmDrift,
}

impl DriftSpec {
    /// Almost-sure bound on `sup |a|`, when one exists.
    pub fn sup_bound(&self) -> Option<f64> {
        match *self {
            DriftSpec::None => Some(0.0),
            DriftSpec::Constant { level } => Some(level.abs()),
            DriftSpec::BoundedWave { amplitude, .. } => Some(amplitude.abs()),
            DriftSpec::FbmDrift { .. } | DriftSpec::SharedFbmDrift => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub drift: DriftSpec,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, drift: DriftSpec) -> Self {
        Self { kind, drift }
    }

    pub fn fbm(hurst: f64) -> Self {
        Self::new(ProcessKind::Fbm { hurst }, DriftSpec::None)
    }

    pub fn brownian() -> Self {
        Self::new(ProcessKind::Brownian, DriftSpec::None)
    }

    pub fn with_drift(self, drift: DriftSpec) -> Self {
        Self { drift, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |h: f64| {
            if h > 0.0 && h < 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("H must lie in (0,1), got {h}")))
            }
        };
        match &self.kind {
            ProcessKind::Fbm { hurst } => check(*hurst)?,
            ProcessKind::IidSum(d) => d.validate()?,
            _ => {}
        }
        if let DriftSpec::FbmDrift { hurst } = self.drift {
            check(hurst)?;
        }
        if matches!(self.kind, ProcessKind::IidSum(_)) && self.drift != DriftSpec::None {
            return Err(invalid("i.i.d. sums take no drift"));
        }
        Ok(())
    }

    /// Incremental variance of `X` for the Gaussian kinds.
    pub fn incremental_variance(&self) -> Option<IncrementalVariance> {
        match &self.kind {
            ProcessKind::Fbm { hurst } => IncrementalVariance::fbm(*hurst).ok(),
            ProcessKind::Brownian => Some(IncrementalVariance::brownian()),
            ProcessKind::GaussianGeneric(iv) => Some(iv.clone()),
            ProcessKind::IidSum(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FgnMethod {
    #[default]
    Circulant,
    Cholesky,
}

/// Prepared exact sampler of `n` fGn increments with step `delta`.
#[derive(Clone)]
pub struct FgnSampler {
    n: usize,
    scale: f64,
    method: Method,
}

#[derive(Clone)]
enum Method {
    Circulant {
        /// `sqrt(λ_k / M)` of the embedding circulant.
        amplitudes: Vec<f64>,
        fft: Arc<dyn ComplexToReal<f64>>,
    },
    /// Durbin–Levinson recursion: `Y_k = Σ_j φ_{k,j} Y_{k−1−j} + v_k^{1/2} Z_k`.
    Levinson { phi: Vec<Vec<f64>>, sd: Vec<f64> },
}

impl FgnSampler {
    pub fn new(hurst: f64, n: usize, delta: f64, method: FgnMethod) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(invalid(format!("H must lie in (0,1), got {hurst}")));
        }
        if n == 0 || !(delta > 0.0) {
            return Err(invalid("need n >= 1 and delta > 0"));
        }
        let rho = fgn_autocovariances(hurst, n + 1);
        let method = match method {
            FgnMethod::Circulant => circulant(&rho)?,
            FgnMethod::Cholesky => levinson(&rho[..n]),
        };
        Ok(Self {
            n,
            scale: delta.powf(hurst),
            method,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        match &self.method {
            Method::Circulant { amplitudes, fft } => {
                FFT_WORKSPACE.with_borrow_mut(|(spectrum, real, scratch)| {
                    // Hermitian spectrum W_0, W_{m/2} real, W_{m−k} = conj(W_k),
                    // variance λ_k/m split evenly; only W_0..W_{m/2} are stored
                    // and the real inverse transform of conj(W) equals the
                    // forward transform of W.
                    let m = amplitudes.len();
                    let half = m / 2;
                    spectrum.resize(half + 1, Complex64::new(0.0, 0.0));
                    real.resize(m, 0.0);
                    scratch.resize(fft.get_scratch_len(), Complex64::new(0.0, 0.0));
                    spectrum[0] =
                        Complex64::new(amplitudes[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
                    for k in 1..half {
                        let a = amplitudes[k] * FRAC_1_SQRT_2;
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        spectrum[k] = Complex64::new(a * re, -a * im);
                    }
                    spectrum[half] = Complex64::new(
                        amplitudes[half] * rng.sample::<f64, _>(StandardNormal),
                        0.0,
                    );
                    fft.process_with_scratch(spectrum, real, scratch)
                        .expect("buffer lengths match the plan and the edge bins are real");
                    out.iter_mut()
                        .zip(real.iter())
                        .for_each(|(o, z)| *o = self.scale * z);
                })
            }
            Method::Levinson { phi, sd } => {
                for k in 0..self.n {
                    let mean: f64 = phi[k]
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * out[k - 1 - j])
                        .sum();
                    let z: f64 = rng.sample(StandardNormal);
                    out[k] = mean + sd[k] * z;
                }
                out.iter_mut().for_each(|v| *v *= self.scale);
            }
        }
    }

    pub fn sample(&self, seed: SeedSpec) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sample_into(&mut seed.rng(SubStream::Main), &mut out);
        out
    }
}

thread_local! {
    /// Per-thread spectrum, output and scratch buffers, reused across paths.
    static FFT_WORKSPACE: RefCell<(Vec<Complex64>, Vec<f64>, Vec<Complex64>)> =
        const { RefCell::new((Vec::new(), Vec::new(), Vec::new())) };
}

/// Circulant of size `2n` built from `ρ_0..ρ_n`.
fn circulant(rho: &[f64]) -> Result<Method> {
    let n = rho.len() - 1;
    let m = 2 * n;
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..=n {
        c[k].re = rho[k];
    }
    for k in 1..n {
        c[m - k].re = rho[k];
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut c);
    let max = c.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min = c.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE * max {
        return Err(Error::EmbeddingFailure {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    let amplitudes = c
        .iter()
        .map(|z| (z.re.max(0.0) / m as f64).sqrt())
        .collect();
    let fft = RealFftPlanner::<f64>::new().plan_fft_inverse(m);
    Ok(Method::Circulant { amplitudes, fft })
}

fn levinson(rho: &[f64]) -> Method {
    let n = rho.len();
    let mut phi: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut v = rho[0];
    let mut sd = Vec::with_capacity(n);
    phi.push(Vec::new());
    sd.push(v.sqrt());
    for k in 1..n {
        let prev = &phi[k - 1];
        let num = rho[k]
            - prev
                .iter()
                .enumerate()
                .map(|(j, c)| c * rho[k - 1 - j])
                .sum::<f64>();
        let kappa = num / v;
        let mut next: Vec<f64> = prev
            .iter()
            .enumerate()
            .map(|(j, c)| c - kappa * prev[k - 2 - j])
            .collect();
        next.push(kappa);
        v *= 1.0 - kappa * kappa;
        sd.push(v.max(0.0).sqrt());
        phi.push(next);
    }
    Method::Levinson { phi, sd }
}

/// `n` exact fGn increments with `Cov(Y_i, Y_j) = δ^{2H} ρ_H(|i − j|)`.
pub fn simulate_fgn(
    hurst: f64,
    n: usize,
    delta: f64,
    seed: SeedSpec,
    method: FgnMethod,
) -> Result<Vec<f64>> {
    Ok(FgnSampler::new(hurst, n, delta, method)?.sample(seed))
}

/// Partial sums `S_0 = 0, …, S_n` of i.i.d. draws.
pub fn simulate_iid_partial_sums(dist: &DistSpec, n: usize, seed: SeedSpec) -> Vec<f64> {
    let mut rng = seed.rng(SubStream::Main);
    iid_partial_sums(dist, n, &mut rng)
}

fn iid_partial_sums(dist: &DistSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut s = 0.0;
    out.push(s);
    for _ in 0..n {
        s += dist.sample(rng);
        out.push(s);
    }
    out
}

/// `y_k = x_k + δ Σ_{j<k} a_j`.
pub fn compose_drift(x: &SamplePath, a: &SamplePath) -> Result<SamplePath> {
    if x.grid() != a.grid() {
        return Err(invalid("path and drift live on different grids"));
    }
    let values = compose_values(x.values(), a.values(), x.grid().delta());
    SamplePath::new(*x.grid(), values)
}

fn compose_values(x: &[f64], a: &[f64], delta: f64) -> Vec<f64> {
    let mut acc = 0.0;
    x.iter()
        .zip(a)
        .map(|(x, a)| {
            let y = x + delta * acc;
            acc += a;
            y
        })
        .collect()
}

/// One draw of `X` and of the drift `a` (when present) on a common grid.
#[derive(Debug, Clone)]
pub struct Realization {
    pub x: Vec<f64>,
    pub drift: Option<Vec<f64>>,
}

impl Realization {
    /// Values of `y = X + ∫a`.
    pub fn y(&self, delta: f64) -> Vec<f64> {
        match &self.drift {
            None => self.x.clone(),
            Some(a) => compose_values(&self.x, a, delta),
        }
    }
}

#[derive(Clone)]
enum Driver {
    Fgn(FgnSampler),
    Brownian {
        sd: f64,
    },
    /// Row-major `A` with `Γ = A Aᵀ`.
    Factor {
        n: usize,
        a: Vec<f64>,
    },
    IidSum(DistSpec),
}

impl Driver {
    fn increments(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        match self {
            Driver::Fgn(s) => s.sample_into(rng, &mut out),
            Driver::Brownian { sd } => out.iter_mut().for_each(|v| {
                let z: f64 = rng.sample(StandardNormal);
                *v = sd * z;
            }),
            Driver::Factor { n, a } => {
                let z: Vec<f64> = (0..*n).map(|_| rng.sample(StandardNormal)).collect();
                for (o, row) in out.iter_mut().zip(a.chunks(*n)) {
                    *o = row.iter().zip(&z).map(|(a, z)| a * z).sum();
                }
            }
            Driver::IidSum(d) => {
                let s = iid_partial_sums(d, n, rng);
                return s.windows(2).map(|w| w[1] - w[0]).collect();
            }
        }
        out
    }

    fn path(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        if let Driver::IidSum(d) = self {
            return iid_partial_sums(d, n, rng);
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        out.push(s);
        for v in self.increments(rng, n) {
            s += v;
            out.push(s);
        }
        out
    }
}

/// Sampler for a [`ProcessSpec`] on a fixed grid; the covariance
/// factorization is computed once and shared by all paths.
#[derive(Clone)]
pub struct PathSampler {
    grid: UniformGrid,
    driver: Driver,
    drift: DriftSpec,
    drift_driver: Option<FgnSampler>,
}

impl PathSampler {
    pub fn new(spec: &ProcessSpec, grid: UniformGrid) -> Result<Self> {
        Self::with_method(spec, grid, FgnMethod::Circulant)
    }

    pub fn with_method(spec: &ProcessSpec, grid: UniformGrid, method: FgnMethod) -> Result<Self> {
        spec.validate()?;
        let n = grid.steps();
        let delta = grid.delta();
        let driver = match &spec.kind {
            ProcessKind::Fbm { hurst } => {
                let s = match FgnSampler::new(*hurst, n, delta, method) {
                    Err(Error::EmbeddingFailure { .. }) => {
                        FgnSampler::new(*hurst, n, delta, FgnMethod::Cholesky)
                    }
                    other => other,
                }?;
                Driver::Fgn(s)
            }
            ProcessKind::Brownian => Driver::Brownian { sd: delta.sqrt() },
            ProcessKind::GaussianGeneric(iv) => Driver::Factor {
                n,
                a: covariance_factor(iv, &grid)?,
            },
            ProcessKind::IidSum(d) => Driver::IidSum(*d),
        };
        let drift_driver = match spec.drift {
            DriftSpec::FbmDrift { hurst } => {
                Some(FgnSampler::new(hurst, n, delta, FgnMethod::Circulant)?)
            }
            _ => None,
        };
        Ok(Self {
            grid,
            driver,
            drift: spec.drift,
            drift_driver,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn drift(&self) -> DriftSpec {
        self.drift
    }

    /// Values of `X`, `X_0 = 0`.
    pub fn sample_x(&self, seed: SeedSpec) -> Vec<f64> {
        self.driver
            .path(&mut seed.rng(SubStream::Main), self.grid.steps())
    }

    pub fn sample(&self, seed: SeedSpec) -> Realization {
        let x = self.sample_x(seed);
        let n = self.grid.steps();
        let drift = match self.drift {
            DriftSpec::None => None,
            DriftSpec::Constant { level } => Some(vec![level; n + 1]),
            DriftSpec::BoundedWave {
                amplitude,
                frequency,
            } => {
                let phase = 2.0 * PI * seed.rng(SubStream::Drift).random::<f64>();
                Some(
                    (0..=n)
                        .map(|k| {
                            amplitude * (2.0 * PI * frequency * self.grid.time(k) + phase).sin()
                        })
                        .collect(),
                )
            }
            DriftSpec::FbmDrift { .. } => {
                let s = self.drift_driver.as_ref().expect("prepared drift sampler");
                let mut rng = seed.rng(SubStream::Drift);
                let mut inc = vec![0.0; n];
                s.sample_into(&mut rng, &mut inc);
                let mut acc = 0.0;
                let mut a = Vec::with_capacity(n + 1);
                a.push(0.0);
                for v in inc {
                    acc += v;
                    a.push(acc);
                }
                Some(a)
            }
            DriftSpec::SharedFbmDrift => Some(x.clone()),
        };
        Realization { x, drift }
    }

    /// Values of `y = X + ∫a`.
    pub fn sample_y(&self, seed: SeedSpec) -> Vec<f64> {
        self.sample(seed).y(self.grid.delta())
    }
}

/// `A = V Λ^{1/2}` from the eigendecomposition of the increment covariance.
fn covariance_factor(iv: &IncrementalVariance, grid: &UniformGrid) -> Result<Vec<f64>> {
    let n = grid.steps();
    let cov = increment_covariance(iv, grid)?;
    let (w, v) = symmetric_eigen(n, &cov.to_dense())?;
    let max = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOLERANCE * max {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
            tolerance: -PSD_TOLERANCE * max,
        });
    }
    let root: Vec<f64> = w.iter().map(|x| x.max(0.0).sqrt()).collect();
    let mut a = v;
    for row in a.chunks_mut(n) {
        row.iter_mut().zip(&root).for_each(|(x, r)| *x *= r);
    }
    Ok(a)
}

/// Path of `X` (no drift) for a continuous-time kind.
pub fn simulate_path(spec: &ProcessSpec, grid: UniformGrid, seed: SeedSpec) -> Result<SamplePath> {
    if matches!(spec.kind, ProcessKind::IidSum(_)) {
        return Err(invalid("use simulate_iid_partial_sums for i.i.d. sums"));
    }
    let values = PathSampler::new(spec, grid)?.sample_x(seed);
    SamplePath::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cov(samples: &[Vec<f64>], i: usize, j: usize) -> f64 {
        samples.iter().map(|s| s[i] * s[j]).sum::<f64>() / samples.len() as f64
    }

    #[test]
    fn deterministic_per_seed() {
        let s = SeedSpec::new(0, 0);
        for method in [FgnMethod::Circulant, FgnMethod::Cholesky] {
            let a = simulate_fgn(0.3, 64, 1.0 / 64.0, s, method).unwrap();
            let b = simulate_fgn(0.3, 64, 1.0 / 64.0, s, method).unwrap();
            assert_eq!(a, b);
            let c = simulate_fgn(0.3, 64, 1.0 / 64.0, s.with_stream(1), method).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn levinson_reproduces_covariance_factor() {
        // the recursion is exact: its implied covariance equals the Toeplitz matrix
        let rho = fgn_autocovariances(0.7, 6);
        let Method::Levinson { phi, sd } = levinson(&rho) else {
            unreachable!()
        };
        // unit-lower L^{-1} rows from φ, then Γ = L D Lᵀ
        let n = 6;
        let mut linv = vec![0.0; n * n];
        for k in 0..n {
            linv[k * n + k] = 1.0;
            for (j, c) in phi[k].iter().enumerate() {
                linv[k * n + (k - 1 - j)] = -c;
            }
        }
        // solve for columns of L = linv^{-1}
        let mut l = vec![0.0; n * n];
        for col in 0..n {
            for row in 0..n {
                let mut v = if row == col { 1.0 } else { 0.0 };
                for k in 0..row {
                    v -= linv[row * n + k] * l[k * n + col];
                }
                l[row * n + col] = v;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let g: f64 = (0..n)
                    .map(|k| l[i * n + k] * sd[k] * sd[k] * l[j * n + k])
                    .sum();
                assert!((g - rho[i.abs_diff(j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn circulant_lag_covariances_match() {
        let n = 16;
        let draws = 100_000;
        let sampler = FgnSampler::new(0.3, n, 1.0, FgnMethod::Circulant).unwrap();
        let samples: Vec<Vec<f64>> = (0..draws)
            .map(|i| sampler.sample(SeedSpec::new(11, i)))
            .collect();
        let rho = fgn_autocovariances(0.3, n);
        for (lag, want) in rho.iter().enumerate() {
            let got: f64 = (0..n - lag)
                .map(|i| sample_cov(&samples, i, i + lag))
                .sum::<f64>()
                / (n - lag) as f64;
            // per-entry SE ≤ sqrt(2/draws); averaging only helps
            let se = (2.0 / draws as f64).sqrt();
            assert!((got - want).abs() < 4.0 * se, "lag {lag}: {got} vs {want}");
        }
    }

    #[test]
    fn brownian_increments_uncorrelated() {
        let sampler = FgnSampler::new(0.5, 8, 0.25, FgnMethod::Circulant).unwrap();
        let Method::Circulant { amplitudes, .. } = &sampler.method else {
            unreachable!()
        };
        // flat spectrum: all embedding eigenvalues equal 1
        for a in amplitudes {
            assert!((a * a * 16.0 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn terminal_variance() {
        let grid = UniformGrid::new(1.0, 1024).unwrap();
        for spec in [ProcessSpec::brownian(), ProcessSpec::fbm(0.3)] {
            let sampler = PathSampler::new(&spec, grid).unwrap();
            let draws = 10_000;
            let ends: Vec<f64> = (0..draws)
                .map(|i| *sampler.sample_x(SeedSpec::new(5, i)).last().unwrap())
                .collect();
            let var = ends.iter().map(|v| v * v).sum::<f64>() / draws as f64;
            let se = (2.0 / draws as f64).sqrt();
            assert!((var - 1.0).abs() < 4.0 * se, "{var}");
        }
    }

    #[test]
    fn generic_sampler_matches_covariance() {
        let iv = IncrementalVariance::custom(|s, t| (t - s) * (1.0 + 0.5 * (s + t)), false, None);
        let grid = UniformGrid::new(1.0, 4).unwrap();
        let spec = ProcessSpec::new(ProcessKind::GaussianGeneric(iv.clone()), DriftSpec::None);
        let sampler = PathSampler::new(&spec, grid).unwrap();
        let draws = 50_000;
        let ends: Vec<Vec<f64>> = (0..draws)
            .map(|i| sampler.sample_x(SeedSpec::new(3, i)))
            .collect();
        for k in 1..=4 {
            let var = ends.iter().map(|v| v[k] * v[k]).sum::<f64>() / draws as f64;
            let want = iv.sigma2(0.0, grid.time(k));
            assert!(
                (var - want).abs() < 4.0 * want * (2.0 / draws as f64).sqrt(),
                "{k}"
            );
        }
    }

    #[test]
    fn partial_sums() {
        let s = simulate_iid_partial_sums(&DistSpec::Rademacher, 3, SeedSpec::new(1, 2));
        assert_eq!(s[0], 0.0);
        assert!(s.windows(2).all(|w| (w[1] - w[0]).abs() == 1.0));
        let u = DistSpec::Uniform { lo: -1.0, hi: 1.0 };
        assert_eq!(u.mean_abs(), 0.5);
        assert_eq!(u.range_bound(), 1.0);
        let draws = simulate_iid_partial_sums(&u, 10, SeedSpec::new(0, 0));
        assert_eq!(draws.len(), 11);
    }

    #[test]
    fn scaled_beta_mean_abs() {
        // Beta(1,1) is uniform
        let b = DistSpec::ScaledBeta {
            lo: -1.0,
            hi: 3.0,
            alpha: 1.0,
            beta: 1.0,
        };
        let u = DistSpec::Uniform { lo: -1.0, hi: 3.0 };
        assert!((b.mean_abs() - u.mean_abs()).abs() < 1e-12);
        // Beta(2,2) on [-1,1]: density 3(1−z²)/4, E|Z| = 3/8
        let b = DistSpec::ScaledBeta {
            lo: -1.0,
            hi: 1.0,
            alpha: 2.0,
            beta: 2.0,
        };
        assert!((b.mean_abs() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn drift_composition() {
        let grid = UniformGrid::new(1.0, 4).unwrap();
        let x = SamplePath::new(grid, vec![0.0, 0.5, -0.2, 0.1, 0.3]).unwrap();
        let zero = SamplePath::zeros(grid);
        assert_eq!(compose_drift(&x, &zero).unwrap().values(), x.values());
        let one = SamplePath::new(grid, vec![1.0; 5]).unwrap();
        let y = compose_drift(&zero, &one).unwrap();
        assert!((y.values()[4] - 1.0).abs() < 1e-15);
        let lin = compose_drift(&x, &one).unwrap();
        for k in 0..5 {
            assert!((lin.values()[k] - y.values()[k] - x.values()[k]).abs() < 1e-15);
        }
        let other = SamplePath::zeros(UniformGrid::new(2.0, 4).unwrap());
        assert!(compose_drift(&x, &other).is_err());
    }

    #[test]
    fn drift_kinds() {
        let grid = UniformGrid::new(1.0, 64).unwrap();
        let seed = SeedSpec::new(9, 0);
        let base = ProcessSpec::fbm(0.3);
        let plain = PathSampler::new(&base, grid).unwrap().sample(seed);
        let shared = PathSampler::new(&base.clone().with_drift(DriftSpec::SharedFbmDrift), grid)
            .unwrap()
            .sample(seed);
        assert_eq!(shared.x, plain.x);
        assert_eq!(shared.drift.as_ref().unwrap(), &plain.x);
        let wave = DriftSpec::BoundedWave {
            amplitude: 1.0,
            frequency: 3.0,
        };
        let r = PathSampler::new(&base.clone().with_drift(wave), grid)
            .unwrap()
            .sample(seed);
        assert_eq!(r.x, plain.x);
        assert!(r.drift.unwrap().iter().all(|a| a.abs() <= 1.0));
        let ind = PathSampler::new(&base.with_drift(DriftSpec::FbmDrift { hurst: 0.7 }), grid)
            .unwrap()
            .sample(seed);
        assert_eq!(ind.x, plain.x);
        assert_ne!(ind.drift.as_ref().unwrap(), &plain.x);
    }

    #[test]
    fn rejects_bad_hurst() {
        assert!(simulate_fgn(1.2, 8, 0.1, SeedSpec::new(0, 0), FgnMethod::Circulant).is_err());
        let grid = UniformGrid::new(1.0, 8).unwrap();
        assert!(simulate_path(&ProcessSpec::fbm(0.0), grid, SeedSpec::new(0, 0)).is_err());
    }
}
