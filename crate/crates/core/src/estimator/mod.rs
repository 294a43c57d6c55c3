//! Fourier estimator of real and Hilbert-complexified covariance for
//! asynchronous step-function prices.
//!
//! Every asset is reduced to its harmonics `c_k = a_k + i·b_k` of the
//! log-price increment process on `[0, 2π]`, `k = 1..=K` with
//! `K = ⌊T / 2τ⌋`. The complexified covariance of a pair is
//! `2·(2π·πτ/T)·Σ_k conj(c_k(i))·c_k(j)`; its real part is twice the real
//! Fourier covariance, a factor that cancels in correlations.
//!
//! Phase convention: `ρ_kl = s_kl·e^{-iθ_kl}`. For a pure harmonic `m` where
//! asset `l` repeats asset `k` with delay `δ` (in rescaled time),
//! `θ_kl = -m·δ`, so `θ_kl < 0` means `k` leads `l`.

mod coeffs;
mod covariance;
pub mod kernel;

pub use coeffs::{complex_increment_coeffs, fourier_coeffs, EstimatorConfig, FourierCoefficients};
pub use covariance::{
    all_coefficients, complex_covariance_matrix, complex_covariance_pair, covariance_to_correlation,
    estimate_covariance, estimate_per_session, magnitude_phase, real_correlation_matrix, real_covariance,
    unit_diagonal, ComplexCorrelationMatrix, CovarianceMatrix,
};
