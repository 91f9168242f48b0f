//! Certified upper bounds for small-ball probabilities `P(‖y‖ ≤ ε)` of
//! processes `y_t = X_t + ∫₀ᵗ a_s ds`, and Monte Carlo tools to check them.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: uniform time grids, sample paths and path norms;
//! * [`simulate`]: exact fGn/fBm, generic Gaussian and i.i.d. sum paths, drifts;
//! * [`gauss`]: incremental variances, increment covariances, spectral symbols;
//! * [`concentration`]: tail bounds and exact binomial confidence limits;
//! * [`bounds`]: certificates built from the composition theorems;
//! * [`mc`]: small-ball estimation, rate fits and certificate validation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod concentration;
pub mod error;
pub mod gauss;
pub mod grid;
pub mod linalg;
pub mod mc;
pub mod rng;
pub mod simulate;

pub use error::{Error, Infeasibility, Result};
pub use grid::{SamplePath, UniformGrid};
pub use rng::SeedSpec;
