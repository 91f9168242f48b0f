//! Dense symmetric eigen-solvers, power iteration and FFT Toeplitz products.

use std::sync::Arc;

use faer::{Mat, Side};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Row-major symmetric matrix size above which only iterative methods are used.
pub const DENSE_EIGEN_LIMIT: usize = 4096;

/// All eigenvalues (ascending) of a symmetric row-major matrix.
pub fn symmetric_eigenvalues(n: usize, data: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(data.len(), n * n);
    let m = Mat::<f64>::from_fn(n, n, |i, j| data[i * n + j]);
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| invalid(format!("eigenvalue solver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigendecomposition `A = U diag(w) Uᵀ` of a symmetric row-major matrix.
/// Returns `(w, U)` with `U` row-major.
pub fn symmetric_eigen(n: usize, data: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| data[i * n + j]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| invalid(format!("eigen decomposition failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let w: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            vecs[i * n + j] = u[(i, j)];
        }
    }
    Ok((w, vecs))
}

/// Largest-magnitude eigenvalue of a symmetric operator by power iteration.
/// Stops when the Rayleigh quotient changes by less than `rel_tol`
/// relative, or after `max_iter` products.
pub fn power_iteration<F>(n: usize, mut matvec: F, rel_tol: f64, max_iter: usize) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    // deterministic, not orthogonal to the alternating top eigenvectors of
    // Toeplitz matrices
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662466927).fract())
        .collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut lambda = 0.0_f64;
    for _ in 0..max_iter {
        matvec(&x, &mut y);
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = normalize(&mut y);
        std::mem::swap(&mut x, &mut y);
        if norm == 0.0 {
            return 0.0;
        }
        let converged = (rq.abs() - lambda).abs() <= rel_tol * rq.abs();
        lambda = rq.abs();
        if converged {
            break;
        }
    }
    lambda
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Symmetric Toeplitz matrix `T[i][j] = r[|i-j|]` applied through a
/// circulant embedding and FFTs, O(N log N) per product.
pub struct ToeplitzOperator {
    n: usize,
    size: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzOperator {
    pub fn new(first_row: &[f64]) -> Self {
        let n = first_row.len();
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut c = vec![Complex64::new(0.0, 0.0); size];
        c[..n]
            .iter_mut()
            .zip(first_row)
            .for_each(|(c, r)| c.re = *r);
        for k in 1..n {
            c[size - k].re = first_row[k];
        }
        forward.process(&mut c);
        Self {
            n,
            size,
            spectrum: c,
            forward,
            inverse,
        }
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        buf[..self.n].iter_mut().zip(x).for_each(|(b, v)| b.re = *v);
        self.forward.process(&mut buf);
        buf.iter_mut()
            .zip(&self.spectrum)
            .for_each(|(b, s)| *b *= s);
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        out.iter_mut()
            .zip(&buf[..self.n])
            .for_each(|(o, b)| *o = b.re * scale);
    }
}
