//! Gaussian machinery: incremental variances, increment covariance
//! matrices and the fGn spectral density.

pub mod covariance;
pub mod spectral;
pub mod variance;

pub use covariance::{
    class_two_norm_bound, fgn_autocovariance, fgn_autocovariances, gamma_two_norm_bound,
    increment_covariance, lag_kernel, lag_kernel_partial_sum, lag_kernel_sum, matrix_norms,
    row_sum_envelope, IncrementCovariance, MatrixNorms, PSD_TOLERANCE,
};
pub use spectral::{fgn_symbol, symbol_sup, SpectralSymbol, SymbolSup, DEFAULT_TRUNCATION};
pub use variance::{
    estimate_class_parameters, log_spaced, sigma2_fbm, ClassEstimate, ClassParams,
    IncrementalVariance,
};
