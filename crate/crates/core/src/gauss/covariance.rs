//! Increment covariance matrices `Γ_ij = E[Y_i Y_j]`, `Y_i = X_{t_i} − X_{t_{i−1}}`,
//! their norms, and a priori bounds on `‖Γ‖₂` for the class `X^(H,β)`.

use std::io::{self, Write};
use std::sync::OnceLock;

use serde::Serialize;

use super::variance::{ClassParams, IncrementalVariance};
use crate::error::{invalid, Error, Result};
use crate::grid::UniformGrid;
use crate::linalg::{power_iteration, symmetric_eigenvalues, ToeplitzOperator, DENSE_EIGEN_LIMIT};

/// Relative tolerance on negative eigenvalues, shared with the samplers.
pub const PSD_TOLERANCE: f64 = 1e-10;

const SERIES_LAG: f64 = 50.0;

/// Second difference `(m+1)^a − 2m^a + (m−1)^a` for `m ≥ 1`, accurate for
/// large `m` where direct evaluation cancels.
fn second_difference_pow(a: f64, m: f64) -> f64 {
    if m < SERIES_LAG {
        return (m + 1.0).powf(a) - 2.0 * m.powf(a) + (m - 1.0).powf(a);
    }
    // 2 Σ_j binom(a, 2j) m^(a-2j)
    let x = 1.0 / (m * m);
    let c2 = a * (a - 1.0) / 2.0;
    let c4 = c2 * (a - 2.0) * (a - 3.0) / 12.0;
    let c6 = c4 * (a - 4.0) * (a - 5.0) / 30.0;
    let c8 = c6 * (a - 6.0) * (a - 7.0) / 56.0;
    2.0 * m.powf(a) * x * (c2 + x * (c4 + x * (c6 + x * c8)))
}

/// Autocovariance of unit-step fractional Gaussian noise,
/// `ρ_H(k) = ((k+1)^{2H} − 2k^{2H} + |k−1|^{2H}) / 2`.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    0.5 * second_difference_pow(2.0 * hurst, lag as f64)
}

/// `ρ_H(0..n)`.
pub fn fgn_autocovariances(hurst: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| fgn_autocovariance(hurst, k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixNorms {
    /// Maximum absolute column sum.
    pub one: f64,
    /// Maximum absolute row sum.
    pub infinity: f64,
    /// Largest eigenvalue magnitude.
    pub two: f64,
    pub frobenius: f64,
}

#[derive(Debug, Clone)]
enum Storage {
    /// `Γ_ij = row[|i − j|]`.
    Toeplitz(Vec<f64>),
    /// Row-major `n × n`.
    Dense(Vec<f64>),
}

/// Covariance matrix of the increments of a process on a uniform grid.
#[derive(Debug)]
pub struct IncrementCovariance {
    n: usize,
    storage: Storage,
    norms: OnceLock<MatrixNorms>,
}

impl Clone for IncrementCovariance {
    fn clone(&self) -> Self {
        let norms = OnceLock::new();
        if let Some(v) = self.norms.get() {
            let _ = norms.set(*v);
        }
        Self {
            n: self.n,
            storage: self.storage.clone(),
            norms,
        }
    }
}

/// `E[Y_i Y_j]` by polarization, 0-based increment indices.
fn polarize(iv: &IncrementalVariance, grid: &UniformGrid, i: usize, j: usize) -> f64 {
    let t = |k: usize| grid.time(k);
    let s = |a: usize, b: usize| iv.sigma2(t(a), t(b));
    0.5 * ((s(i, j + 1) + s(i + 1, j)) - s(i + 1, j + 1) - s(i, j))
}

/// Build `Γ` for the increments of `iv` on `grid`.
///
/// Closed-form kinds are positive semidefinite by construction; for custom
/// variance functions the smallest eigenvalue is checked against
/// `−1e−10 ‖Γ‖₂` and an indefinite matrix is rejected.
pub fn increment_covariance(
    iv: &IncrementalVariance,
    grid: &UniformGrid,
) -> Result<IncrementCovariance> {
    let n = grid.steps();
    let delta = grid.delta();
    let cov = if let Some(components) = iv.power_components() {
        let row = (0..n)
            .map(|k| {
                components
                    .iter()
                    .map(|(w, h)| w * delta.powf(2.0 * h) * fgn_autocovariance(*h, k))
                    .sum()
            })
            .collect();
        IncrementCovariance::toeplitz(row)
    } else if iv.is_stationary() {
        IncrementCovariance::toeplitz((0..n).map(|k| polarize(iv, grid, 0, k)).collect())
    } else {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = polarize(iv, grid, i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        IncrementCovariance::dense(n, data)?
    };
    if !iv.is_analytic() {
        cov.check_psd()?;
    }
    Ok(cov)
}

impl IncrementCovariance {
    /// Symmetric Toeplitz matrix with the given first row.
    pub fn toeplitz(first_row: Vec<f64>) -> Self {
        Self {
            n: first_row.len(),
            storage: Storage::Toeplitz(first_row),
            norms: OnceLock::new(),
        }
    }

    /// Dense symmetric matrix from row-major data.
    pub fn dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(invalid(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self {
            n,
            storage: Storage::Dense(data),
            norms: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Toeplitz(r) => r[i.abs_diff(j)],
            Storage::Dense(d) => d[i * self.n + j],
        }
    }

    pub fn is_toeplitz(&self) -> bool {
        matches!(self.storage, Storage::Toeplitz(_))
    }

    pub fn first_row(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Toeplitz(r) => Some(r),
            Storage::Dense(_) => None,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `Σ_k Γ_kk = E‖Y‖₂²`.
    pub fn trace(&self) -> f64 {
        match &self.storage {
            Storage::Toeplitz(r) => r[0] * self.n as f64,
            Storage::Dense(_) => self.diagonal().iter().sum(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(d) => d.clone(),
            Storage::Toeplitz(_) => (0..self.n * self.n)
                .map(|k| self.get(k / self.n, k % self.n))
                .collect(),
        }
    }

    /// All eigenvalues, ascending. Dense solver; intended for `N ≤ 4096`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        symmetric_eigenvalues(self.n, &self.to_dense())
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        match &self.storage {
            Storage::Toeplitz(r) => ToeplitzOperator::new(r).apply(x, out),
            Storage::Dense(d) => dense_matvec(self.n, d, x, out),
        }
    }

    /// Cached norms; computed once.
    pub fn norms(&self) -> MatrixNorms {
        *self.norms.get_or_init(|| self.compute_norms())
    }

    fn max_abs_row_sum(&self) -> f64 {
        match &self.storage {
            Storage::Toeplitz(r) => {
                let mut prefix = Vec::with_capacity(self.n);
                let mut acc = 0.0;
                for v in r {
                    acc += v.abs();
                    prefix.push(acc);
                }
                (0..self.n)
                    .map(|j| prefix[j] + prefix[self.n - 1 - j] - r[0].abs())
                    .fold(0.0, f64::max)
            }
            Storage::Dense(d) => d
                .chunks(self.n)
                .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    fn frobenius(&self) -> f64 {
        match &self.storage {
            Storage::Toeplitz(r) => {
                let n = self.n;
                let off: f64 = (1..n).map(|k| 2.0 * (n - k) as f64 * r[k] * r[k]).sum();
                (n as f64 * r[0] * r[0] + off).sqrt()
            }
            Storage::Dense(d) => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }

    fn spectral_radius(&self) -> f64 {
        if self.n <= DENSE_EIGEN_LIMIT {
            let ev = self.eigenvalues().expect("symmetric eigen solver");
            ev[0].abs().max(ev[ev.len() - 1].abs())
        } else {
            match &self.storage {
                Storage::Toeplitz(r) => {
                    let op = ToeplitzOperator::new(r);
                    power_iteration(self.n, |x, y| op.apply(x, y), 1e-8, 100_000)
                }
                Storage::Dense(d) => {
                    power_iteration(self.n, |x, y| dense_matvec(self.n, d, x, y), 1e-8, 100_000)
                }
            }
        }
    }

    fn compute_norms(&self) -> MatrixNorms {
        let row = self.max_abs_row_sum();
        let two = self.spectral_radius();
        debug_assert!(
            two <= row * (1.0 + 1e-9) + 1e-300,
            "‖Γ‖₂ = {two} > ‖Γ‖₁ = {row}"
        );
        MatrixNorms {
            one: row,
            infinity: row,
            two,
            frobenius: self.frobenius(),
        }
    }

    fn check_psd(&self) -> Result<()> {
        let (min, max) = if self.n <= DENSE_EIGEN_LIMIT {
            let ev = self.eigenvalues()?;
            (ev[0], ev[ev.len() - 1])
        } else {
            // shift by the row-sum bound so the smallest eigenvalue becomes dominant
            let shift = self.max_abs_row_sum();
            let top = self.norms().two;
            let shifted = power_iteration(
                self.n,
                |x, y| {
                    self.matvec(x, y);
                    y.iter_mut().zip(x).for_each(|(y, x)| *y = shift * x - *y);
                },
                1e-10,
                100_000,
            );
            (shift - shifted, top)
        };
        let tolerance = -PSD_TOLERANCE * max.abs().max(min.abs());
        if min < tolerance {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
                tolerance,
            });
        }
        Ok(())
    }

    /// Row-major CSV of the full matrix, shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                if j > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{}", self.get(i, j))?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn dense_matvec(n: usize, d: &[f64], x: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(d.chunks(n)) {
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

pub fn matrix_norms(gamma: &IncrementCovariance) -> MatrixNorms {
    gamma.norms()
}

/// `∫₀¹∫₀¹ |m + u − v|^{2H−2} du dv` for `m ≥ 1`: the exact cell integral of
/// the mixed-derivative envelope between increments `m` steps apart.
pub fn lag_kernel(hurst: f64, m: usize) -> f64 {
    let a = 2.0 * hurst;
    let x = m as f64;
    if (a - 1.0).abs() < 1e-9 {
        let xl = |y: f64| if y > 0.0 { y * y.ln() } else { 0.0 };
        return xl(x + 1.0) - 2.0 * xl(x) + xl(x - 1.0);
    }
    (second_difference_pow(a, x) / (a * (a - 1.0))).abs()
}

/// `Σ_{m=1}^{k} lag_kernel(H, m)`. The kernel is the second difference of
/// `g(x) = x^{2H} / (2H(2H−1))` (`x ln x` at `H = ½`), so the sum telescopes
/// to `g(k+1) − g(k) − g(1)`.
pub fn lag_kernel_partial_sum(hurst: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let a = 2.0 * hurst;
    let x = k as f64;
    if (a - 1.0).abs() < 1e-9 {
        return (x + 1.0).ln() + x * (1.0 / x).ln_1p();
    }
    // (k+1)^a − k^a without cancellation
    let step = x.powf(a) * (a * (1.0 / x).ln_1p()).exp_m1();
    (step - 1.0) / (a * (a - 1.0))
}

/// `max_j Σ_k w(|k−j|)` over an `n × n` Toeplitz matrix with `w(0) = w0` and
/// `Σ_{m=1}^{k} w(m) = partial(k)`. For weights nonincreasing in `m ≥ 1` the
/// partial sums are concave, so the middle row is the largest.
fn max_toeplitz_row_sum(w0: f64, partial: impl Fn(usize) -> f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let j = (n - 1) / 2;
    w0 + partial(j) + partial(n - 1 - j)
}

/// Rigorous bound on `‖Γ‖₂` for a process with
/// `σ²(t−δ,t) ≤ C δ^{2H}` and `|∂s∂t σ²| ≤ 2 c_deriv |t−s|^{2H−2}`:
///
/// `|Γ_ij| ≤ c_deriv δ^{2H} lag_kernel(H, |i−j|)` off the diagonal, so
/// `‖Γ‖₂ ≤ ‖Γ‖₁ ≤ δ^{2H} max_j Σ_k b(|k−j|)` with `b(0) = C`.
/// For fBm this equals `‖Γ‖₁` exactly.
pub fn gamma_two_norm_bound(hurst: f64, n: usize, delta: f64, c_deriv: f64, c_upper: f64) -> f64 {
    let partial = |k: usize| c_deriv * lag_kernel_partial_sum(hurst, k);
    delta.powf(2.0 * hurst) * max_toeplitz_row_sum(c_upper, partial, n)
}

/// Same bound from class parameters.
pub fn class_two_norm_bound(class: &ClassParams, n: usize, delta: f64) -> f64 {
    gamma_two_norm_bound(class.hurst, n, delta, class.c_deriv, class.c_upper)
}

/// `N`-uniform majorant `K(N)` of the row sum in [`gamma_two_norm_bound`],
/// i.e. `gamma_two_norm_bound ≤ K(N) δ^{2H}`:
/// `C + 2c'/(2H(1−2H))` for `H < ½`, `C + 2c'(1 + ln N)` at `H = ½`, and
/// `(C + 2c'/(2H−1)) N^{2H−1}` for `H > ½`.
pub fn row_sum_envelope(class: &ClassParams, n: usize) -> f64 {
    let (h, c, cd) = (class.hurst, class.c_upper, class.c_deriv);
    let a = 2.0 * h;
    if (a - 1.0).abs() < 1e-9 {
        c + 2.0 * cd * (1.0 + (n as f64).ln())
    } else if a < 1.0 {
        c + 2.0 * cd / (a * (1.0 - a))
    } else {
        (c + 2.0 * cd / (a - 1.0)) * (n as f64).powf(a - 1.0)
    }
}

/// `S(H,N) = max_j Σ_k (1+|k−j|)^{2H−2}`: bounded for `H < ½`, of order
/// `log N` at `H = ½` and `N^{2H−1}` for `H > ½`.
pub fn lag_kernel_sum(hurst: f64, n: usize) -> f64 {
    let partial = |k: usize| {
        (1..=k)
            .map(|m| (1.0 + m as f64).powf(2.0 * hurst - 2.0))
            .sum::<f64>()
    };
    max_toeplitz_row_sum(1.0, partial, n)
}
