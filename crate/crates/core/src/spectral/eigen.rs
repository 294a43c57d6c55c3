use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimator::ComplexCorrelationMatrix;
use crate::matrix::ComplexMatrix;

/// Largest tolerated `max |ρ_ij - conj(ρ_ji)|` before the solver refuses.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Eigenpairs of a Hermitian matrix, sorted by eigenvalue, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    assets: Vec<String>,
    eigenvalues: Vec<f64>,
    /// Column `i` is `V^(i)`, stored as one `Vec` per component.
    vectors: Vec<Vec<Complex64>>,
    /// Index of the coefficient rotated onto the positive real axis.
    gauge: Vec<usize>,
}

impl EigenDecomposition {
    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn n(&self) -> usize {
        self.assets.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `V^(i)` for 0-based `i`.
    pub fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn gauge_index(&self, i: usize) -> usize {
        self.gauge[i]
    }

    /// Multiply `V^(i)` by a unit-modulus factor without re-fixing the gauge.
    pub fn rotate_vector(&mut self, i: usize, phase: f64) {
        let f = Complex64::from_polar(1.0, phase);
        for v in &mut self.vectors[i] {
            *v *= f;
        }
    }

    /// `Σ_{i ∈ keep} λ_i·V^(i)·V^(i)ᴴ`.
    pub fn partial_sum(&self, keep: impl Fn(usize) -> bool) -> ComplexMatrix {
        let n = self.n();
        let mut out = ComplexMatrix::zeros(n);
        for (i, (lambda, v)) in self.eigenvalues.iter().zip(&self.vectors).enumerate() {
            if !keep(i) {
                continue;
            }
            for r in 0..n {
                let vr = v[r] * lambda;
                for c in r..n {
                    out[(r, c)] += vr * v[c].conj();
                }
            }
        }
        out.make_hermitian_from_upper();
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.partial_sum(|_| true)
    }

    /// `max |(Vᴴ·V - I)_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                let dot: Complex64 = self.vectors[a].iter().zip(&self.vectors[b]).map(|(x, y)| x.conj() * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

/// Eigendecomposition of a complex correlation matrix.
pub fn eig_hermitian(rho: &ComplexCorrelationMatrix) -> Result<EigenDecomposition> {
    eig_matrix(rho.assets(), rho.matrix())
}

/// Eigendecomposition of any Hermitian matrix (covariance, mode-removed
/// correlation, ...).
pub fn eig_matrix(assets: &[String], m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = m.n();
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    if assets.len() != n {
        return Err(Error::AssetMismatch(format!("{} names for a {n}×{n} matrix", assets.len())));
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix passed to the eigensolver".into()));
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let mut h = m.clone();
    h.make_hermitian_from_upper();
    let max_iterations = 200 * n + 1000;
    let eig = h
        .to_nalgebra()
        .try_symmetric_eigen(f64::EPSILON, max_iterations)
        .ok_or(Error::EigenNoConvergence { n, max_iterations })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut gauge = Vec::with_capacity(n);
    for &col in &order {
        let mut v: Vec<Complex64> = eig.eigenvectors.column(col).iter().copied().collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let (g, _) = v.iter().enumerate().fold((0, -1.0), |(bi, bm), (i, z)| {
            let m = z.norm();
            if m > bm {
                (i, m)
            } else {
                (bi, bm)
            }
        });
        let rot = v[g].conj() / (v[g].norm() * norm);
        for z in &mut v {
            *z *= rot;
        }
        v[g] = Complex64::new(v[g].re, 0.0);
        eigenvalues.push(eig.eigenvalues[col]);
        vectors.push(v);
        gauge.push(g);
    }
    let decomp = EigenDecomposition { assets: assets.to_vec(), eigenvalues, vectors, gauge };

    let residual = decomp.reconstruct().frobenius_distance(&h);
    if !residual.is_finite() || residual > 1e-8 * n as f64 * h.frobenius_norm().max(1.0) {
        return Err(Error::EigenNoConvergence { n, max_iterations });
    }
    Ok(decomp)
}

/// `Σ_{i ∉ drop} λ_i·V^(i)·V^(i)ᴴ` with 0-based indices in `drop`.
///
/// The result is not re-normalised to unit diagonal; see
/// [`renormalize`] for that step.
pub fn remove_market_mode(decomp: &EigenDecomposition, drop: &[usize]) -> Result<ComplexMatrix> {
    if decomp.n() == 0 {
        return Err(Error::EmptySpectrum);
    }
    if let Some(&bad) = drop.iter().find(|&&i| i >= decomp.n()) {
        return Err(Error::Config(format!("component {} does not exist (n = {})", bad + 1, decomp.n())));
    }
    Ok(decomp.partial_sum(|i| !drop.contains(&i)))
}

/// Scale a Hermitian PSD matrix back to unit diagonal.
pub fn renormalize(assets: &[String], m: &ComplexMatrix) -> Result<ComplexCorrelationMatrix> {
    crate::estimator::unit_diagonal(assets, m)
}
