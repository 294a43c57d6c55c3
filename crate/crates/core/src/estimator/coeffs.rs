use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::harmonic_sums;
use crate::error::{Error, Result};
use crate::ingest::{TickSeries, TimeAxis};

/// Cutoff configuration shared by every asset of one estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Cutoff time scale τ in seconds.
    pub tau: f64,
    /// Total (spliced) duration T in seconds.
    pub t_span: f64,
    /// Highest harmonic K = ⌊T / 2τ⌋.
    pub harmonics: usize,
}

impl EstimatorConfig {
    pub const DEFAULT_TAU: f64 = 60.0;

    pub fn new(tau: f64, t_span: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        if !(t_span > 0.0 && t_span.is_finite()) {
            return Err(Error::ZeroDuration);
        }
        let harmonics = (t_span / (2.0 * tau)).floor() as usize;
        if harmonics < 1 {
            return Err(Error::Config(format!(
                "duration {t_span} s is shorter than 2τ = {} s; no harmonics",
                2.0 * tau
            )));
        }
        Ok(Self { tau, t_span, harmonics })
    }

    /// Fix K directly; τ becomes T / 2K.
    pub fn with_harmonics(t_span: f64, harmonics: usize) -> Result<Self> {
        if harmonics < 1 {
            return Err(Error::Config("harmonic count must be at least 1".into()));
        }
        if !(t_span > 0.0 && t_span.is_finite()) {
            return Err(Error::ZeroDuration);
        }
        Ok(Self { tau: t_span / (2.0 * harmonics as f64), t_span, harmonics })
    }

    /// `2π · πτ/T`, the factor turning coefficient products into covariances.
    pub fn covariance_scale(&self) -> f64 {
        2.0 * PI * PI * self.tau / self.t_span
    }
}

/// Harmonics `a_k(dp)`, `b_k(dp)` for `k = 1..=K` of one asset's log-price
/// increment process on `[0, 2π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    pub asset_id: String,
    pub t_span: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `(p(t_N) - p(t_1)) / π`.
    pub drift: f64,
}

impl FourierCoefficients {
    pub fn harmonics(&self) -> usize {
        self.a.len()
    }

    /// `c_k = a_k + i·b_k`.
    pub fn complex(&self) -> Vec<Complex64> {
        self.a.iter().zip(&self.b).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    /// Coefficients of the Hilbert transform: `a_k ↦ -b_k`, `b_k ↦ a_k`.
    pub fn hilbert(&self) -> FourierCoefficients {
        FourierCoefficients {
            asset_id: self.asset_id.clone(),
            t_span: self.t_span,
            a: self.b.iter().map(|b| -b).collect(),
            b: self.a.clone(),
            drift: self.drift,
        }
    }

    /// Coefficients of `Z + i·H(Z)`: `(a_k - i·b_k, b_k + i·a_k)`.
    pub fn complexified(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let h = self.hilbert();
        let a = self.a.iter().zip(&h.a).map(|(&x, &hx)| Complex64::new(x, hx)).collect();
        let b = self.b.iter().zip(&h.b).map(|(&x, &hx)| Complex64::new(x, hx)).collect();
        (a, b)
    }
}

/// Fourier coefficients of `dp` for a rescaled step-function series.
///
/// Uses `a_k + i·b_k = (1/π)·Σ_{m≥2} (p_m - p_{m-1})·e^{i·k·t_m}`, which is the
/// Abel-summed form of `drift - (1/π)·Σ p(t_m)·(e^{i·k·t_{m+1}} - e^{i·k·t_m})`
/// once the step function is closed at `t = 2π`. Working on increments keeps
/// the price level out of the sums.
pub fn fourier_coeffs(series: &TickSeries, config: &EstimatorConfig) -> Result<FourierCoefficients> {
    if series.axis() != TimeAxis::Circle {
        return Err(Error::SeriesInvariant {
            asset: series.asset_id().to_string(),
            message: "coefficients need a series rescaled to [0, 2π]".into(),
        });
    }
    if series.len() < 2 {
        return Err(Error::DegenerateSeries { asset: series.asset_id().to_string() });
    }
    if config.harmonics < 1 {
        return Err(Error::Config("harmonic count must be at least 1".into()));
    }
    let (times, increments): (Vec<f64>, Vec<f64>) = series.increments().unzip();
    let (re, im) = harmonic_sums(&times, &increments, config.harmonics);
    let a: Vec<f64> = re.into_iter().map(|v| v / PI).collect();
    let b: Vec<f64> = im.into_iter().map(|v| v / PI).collect();
    let p = series.log_prices();
    let drift = (p[p.len() - 1] - p[0]) / PI;
    if !drift.is_finite() || a.iter().chain(&b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{} Fourier coefficients", series.asset_id())));
    }
    Ok(FourierCoefficients { asset_id: series.asset_id().to_string(), t_span: config.t_span, a, b, drift })
}

/// Coefficients `c_k = (1/π)·Σ dz_m·e^{i·k·t_m}` of a complex increment
/// process given directly as `(t_m, dz_m)` pairs on `[0, 2π]`.
pub fn complex_increment_coeffs(times: &[f64], increments: &[Complex64], harmonics: usize) -> Vec<Complex64> {
    let re_w: Vec<f64> = increments.iter().map(|z| z.re).collect();
    let im_w: Vec<f64> = increments.iter().map(|z| z.im).collect();
    let (rr, ri) = harmonic_sums(times, &re_w, harmonics);
    let (ir, ii) = harmonic_sums(times, &im_w, harmonics);
    (0..harmonics)
        .map(|k| (Complex64::new(rr[k], ri[k]) + Complex64::i() * Complex64::new(ir[k], ii[k])) / PI)
        .collect()
}
