use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::coeffs::{fourier_coeffs, EstimatorConfig, FourierCoefficients};
use crate::error::{Error, Result};
use crate::ingest::{rescale_to_circle, split_by_session, TickSeries, TimeAxis};
use crate::matrix::ComplexMatrix;
use crate::numeric::{conj_dot, CompensatedSum};

fn check_harmonics(c: &FourierCoefficients, config: &EstimatorConfig) -> Result<()> {
    if c.harmonics() != config.harmonics || c.b.len() != config.harmonics {
        return Err(Error::HarmonicMismatch { expected: config.harmonics, found: c.harmonics() });
    }
    Ok(())
}

/// Real Fourier covariance `2π·(πτ/T)·Σ_k [a_k(i)a_k(j) + b_k(i)b_k(j)]`.
pub fn real_covariance(ci: &FourierCoefficients, cj: &FourierCoefficients, config: &EstimatorConfig) -> Result<f64> {
    check_harmonics(ci, config)?;
    check_harmonics(cj, config)?;
    let sum: CompensatedSum =
        ci.a.iter().zip(&cj.a).zip(ci.b.iter().zip(&cj.b)).map(|((ai, aj), (bi, bj))| ai * aj + bi * bj).collect();
    Ok(config.covariance_scale() * sum.value())
}

/// Pairwise complex covariance written term by term from the complexified
/// coefficients: `(a_i - i·b_i)(a_j + i·b_j) + (b_i + i·a_i)(b_j - i·a_j)`.
pub fn complex_covariance_pair(
    ci: &FourierCoefficients,
    cj: &FourierCoefficients,
    config: &EstimatorConfig,
) -> Result<Complex64> {
    check_harmonics(ci, config)?;
    check_harmonics(cj, config)?;
    let i = Complex64::i();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for k in 0..config.harmonics {
        let (ai, bi, aj, bj) = (ci.a[k], ci.b[k], cj.a[k], cj.b[k]);
        let term = (ai - i * bi) * (aj + i * bj) + (bi + i * ai) * (bj - i * aj);
        re.add(term.re);
        im.add(term.im);
    }
    Ok(Complex64::new(re.value(), im.value()) * config.covariance_scale())
}

/// Complex (Hilbert-augmented) covariance matrix with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub assets: Vec<String>,
    pub matrix: ComplexMatrix,
    pub tau: f64,
    pub t_span: f64,
    pub harmonics: usize,
}

/// Build the complex covariance matrix for all assets at once.
///
/// Both summands of the complexified product equal `conj(c_k(i))·c_k(j)` with
/// `c_k = a_k + i·b_k`, so the matrix is `2·scale·Cᴴ·C` for the `K × n`
/// coefficient matrix `C`. Only the upper triangle is computed; the lower
/// triangle is its exact conjugate and the diagonal is exactly real.
pub fn complex_covariance_matrix(all: &[FourierCoefficients], config: &EstimatorConfig) -> Result<CovarianceMatrix> {
    for c in all {
        check_harmonics(c, config)?;
        if c.t_span != config.t_span {
            return Err(Error::Config(format!(
                "{}: duration {} differs from the common duration {}",
                c.asset_id, c.t_span, config.t_span
            )));
        }
    }
    let n = all.len();
    let columns: Vec<Vec<Complex64>> = all.iter().map(FourierCoefficients::complex).collect();
    let factor = 2.0 * config.covariance_scale();
    let rows: Vec<Vec<Complex64>> =
        (0..n).into_par_iter().map(|i| (i..n).map(|j| conj_dot(&columns[i], &columns[j]) * factor).collect()).collect();
    let mut matrix = ComplexMatrix::zeros(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            matrix[(i, i + off)] = v;
        }
    }
    matrix.make_hermitian_from_upper();
    Ok(CovarianceMatrix {
        assets: all.iter().map(|c| c.asset_id.clone()).collect(),
        matrix,
        tau: config.tau,
        t_span: config.t_span,
        harmonics: config.harmonics,
    })
}

/// Hermitian, unit-diagonal matrix of complex correlations `ρ_kl = s·e^{-iθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCorrelationMatrix {
    assets: Vec<String>,
    matrix: ComplexMatrix,
}

impl ComplexCorrelationMatrix {
    /// Validate and wrap a matrix: diagonal within 1e-12 of one and
    /// Hermitian within 1e-12; the stored copy is made exactly Hermitian.
    pub fn new(assets: Vec<String>, mut matrix: ComplexMatrix) -> Result<Self> {
        if assets.len() != matrix.n() {
            return Err(Error::AssetMismatch(format!(
                "{} names for a {}×{} matrix",
                assets.len(),
                matrix.n(),
                matrix.n()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        for (i, a) in assets.iter().enumerate() {
            if (matrix[(i, i)] - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::Format(format!("{a}: correlation diagonal is {}", matrix[(i, i)])));
            }
            matrix[(i, i)] = Complex64::new(1.0, 0.0);
        }
        matrix.make_hermitian_from_upper();
        Ok(Self { assets, matrix })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.assets.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// `(s, θ)` of entry `(i, j)`.
    pub fn magnitude_phase(&self, i: usize, j: usize) -> (f64, f64) {
        magnitude_phase(self.matrix[(i, j)])
    }

    pub fn index_of(&self, asset: &str) -> Option<usize> {
        self.assets.iter().position(|a| a == asset)
    }
}

/// Normalise a Hermitian matrix with positive real diagonal to unit
/// diagonal: `ρ_ij = σ_ij / √(σ_ii·σ_jj)`.
pub fn unit_diagonal(assets: &[String], sigma: &ComplexMatrix) -> Result<ComplexCorrelationMatrix> {
    let n = sigma.n();
    if assets.len() != n {
        return Err(Error::AssetMismatch(format!("{} names for a {n}×{n} matrix", assets.len())));
    }
    let mut variance = Vec::with_capacity(n);
    for (i, asset) in assets.iter().enumerate() {
        let d = sigma[(i, i)];
        if !(d.re > 0.0 && d.re.is_finite()) || d.im.abs() >= 1e-12 * d.re.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NonPositiveVariance { asset: asset.clone(), value: d.re });
        }
        variance.push(d.re);
    }
    let mut rho = ComplexMatrix::zeros(n);
    for i in 0..n {
        rho[(i, i)] = Complex64::new(1.0, 0.0);
        for j in i + 1..n {
            rho[(i, j)] = sigma[(i, j)] / (variance[i] * variance[j]).sqrt();
        }
    }
    rho.make_hermitian_from_upper();
    Ok(ComplexCorrelationMatrix { assets: assets.to_vec(), matrix: rho })
}

pub fn covariance_to_correlation(sigma: &CovarianceMatrix) -> Result<ComplexCorrelationMatrix> {
    unit_diagonal(&sigma.assets, &sigma.matrix)
}

/// `(s, θ)` with `ρ = s·e^{-iθ}`, `θ ∈ (-π, π]`; zero maps to `(0, 0)`.
pub fn magnitude_phase(rho: Complex64) -> (f64, f64) {
    let s = rho.norm();
    if s == 0.0 {
        return (0.0, 0.0);
    }
    let theta = -rho.arg();
    (s, if theta <= -PI { theta + 2.0 * PI } else { theta })
}

/// Real Fourier correlation matrix (row-major), built pairwise from
/// [`real_covariance`].
pub fn real_correlation_matrix(all: &[FourierCoefficients], config: &EstimatorConfig) -> Result<Vec<f64>> {
    let n = all.len();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = real_covariance(&all[i], &all[j], config)?;
            cov[i * n + j] = v;
            cov[j * n + i] = v;
        }
    }
    let mut corr = vec![0.0; n * n];
    for i in 0..n {
        if cov[i * n + i] <= 0.0 {
            return Err(Error::NonPositiveVariance { asset: all[i].asset_id.clone(), value: cov[i * n + i] });
        }
        for j in 0..n {
            corr[i * n + j] = cov[i * n + j] / (cov[i * n + i] * cov[j * n + j]).sqrt();
        }
    }
    Ok(corr)
}

/// Coefficients for every series in parallel.
pub fn all_coefficients(series: &[TickSeries], config: &EstimatorConfig) -> Result<Vec<FourierCoefficients>> {
    series.par_iter().map(|s| fourier_coeffs(s, config)).collect()
}

fn common_span(series: &[TickSeries]) -> Result<f64> {
    let first = series.first().ok_or_else(|| Error::Config("no series to estimate".into()))?;
    let t_span = first.t_span();
    if let Some(s) = series.iter().find(|s| s.t_span() != t_span) {
        return Err(Error::Config(format!(
            "{}: duration {} differs from {} ({})",
            s.asset_id(),
            s.t_span(),
            t_span,
            first.asset_id()
        )));
    }
    Ok(t_span)
}

/// Rescale spliced seconds-axis series (if needed) and estimate the complex
/// covariance at cutoff `tau`.
pub fn estimate_covariance(series: &[TickSeries], tau: f64) -> Result<CovarianceMatrix> {
    let config = EstimatorConfig::new(tau, common_span(series)?)?;
    let rescaled: Vec<TickSeries> = series
        .iter()
        .map(|s| match s.axis() {
            TimeAxis::Circle => Ok(s.clone()),
            TimeAxis::Seconds => rescale_to_circle(s),
        })
        .collect::<Result<_>>()?;
    complex_covariance_matrix(&all_coefficients(&rescaled, &config)?, &config)
}

/// Estimate each session on its own `[0, 2π]` clock and average the
/// covariance matrices. Input series must be spliced on the seconds axis
/// with a common session layout. An asset with no price change inside a
/// session contributes zero to that session.
pub fn estimate_per_session(series: &[TickSeries], tau: f64) -> Result<CovarianceMatrix> {
    let t_span = common_span(series)?;
    let sessions = series[0].sessions().to_vec();
    if series.iter().any(|s| s.sessions() != sessions.as_slice()) {
        return Err(Error::Config("per-session estimation needs a common session layout".into()));
    }
    let n = series.len();
    let per_asset: Vec<Vec<TickSeries>> = series.iter().map(split_by_session).collect::<Result<_>>()?;
    let mut total = ComplexMatrix::zeros(n);
    let mut used = 0usize;
    let mut max_harmonics = 0;
    for session in &sessions {
        let Ok(config) = EstimatorConfig::new(tau, session.len()) else {
            continue;
        };
        max_harmonics = max_harmonics.max(config.harmonics);
        let coeffs = per_asset
            .iter()
            .zip(series)
            .map(|(pieces, full)| {
                let piece = pieces.iter().find(|p| p.sessions()[0] == *session);
                match piece {
                    Some(p) if p.len() >= 2 => fourier_coeffs(&rescale_to_circle(p)?, &config),
                    _ => Ok(FourierCoefficients {
                        asset_id: full.asset_id().to_string(),
                        t_span: config.t_span,
                        a: vec![0.0; config.harmonics],
                        b: vec![0.0; config.harmonics],
                        drift: 0.0,
                    }),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let cov = complex_covariance_matrix(&coeffs, &config)?;
        for i in 0..n {
            for j in 0..n {
                total[(i, j)] += cov.matrix[(i, j)];
            }
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::Config(format!("no session is longer than 2τ = {} s", 2.0 * tau)));
    }
    total.scale(1.0 / used as f64);
    total.make_hermitian_from_upper();
    Ok(CovarianceMatrix {
        assets: series.iter().map(|s| s.asset_id().to_string()).collect(),
        matrix: total,
        tau,
        t_span,
        harmonics: max_harmonics,
    })
}
