use num_complex::Complex64;

use super::eigen::EigenDecomposition;
use crate::error::{Error, Result};
use crate::ingest::{TickSeries, TimeAxis};

/// `CP_i` as a complex step-increment sequence on the union of all event
/// times.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPrincipalComponent {
    /// 0-based component index.
    pub index: usize,
    pub times: Vec<f64>,
    pub increments: Vec<Complex64>,
}

/// Merged event grid: every distinct event time with each asset's
/// log-price increment there.
struct UnionGrid {
    times: Vec<f64>,
    /// `(grid position, asset, dp)` triples sorted by position.
    entries: Vec<(usize, usize, f64)>,
}

fn union_grid(decomp: &EigenDecomposition, series: &[TickSeries]) -> Result<UnionGrid> {
    let assets = decomp.assets();
    if series.len() != assets.len() || series.iter().zip(assets).any(|(s, a)| s.asset_id() != a) {
        let got: Vec<&str> = series.iter().map(TickSeries::asset_id).collect();
        return Err(Error::AssetMismatch(format!("decomposition has {assets:?}, series are {got:?}")));
    }
    if let Some(s) = series.iter().find(|s| s.axis() != TimeAxis::Circle) {
        return Err(Error::SeriesInvariant {
            asset: s.asset_id().to_string(),
            message: "principal components need series rescaled to [0, 2π]".into(),
        });
    }
    let mut times: Vec<f64> = series.iter().flat_map(|s| s.times().iter().copied()).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut entries = Vec::new();
    for (j, s) in series.iter().enumerate() {
        for (t, dp) in s.increments() {
            let pos = times.partition_point(|&u| u < t);
            entries.push((pos, j, dp));
        }
    }
    entries.sort_by_key(|&(pos, j, _)| (pos, j));
    Ok(UnionGrid { times, entries })
}

fn project(grid: &UnionGrid, v: &[Complex64], index: usize) -> ComplexPrincipalComponent {
    let mut increments = vec![Complex64::new(0.0, 0.0); grid.times.len()];
    for &(pos, j, dp) in &grid.entries {
        increments[pos] += v[j] * dp;
    }
    ComplexPrincipalComponent { index, times: grid.times.clone(), increments }
}

/// `dCP_i(t) = Σ_j dp_j(t)·V_j^(i)` for every component.
///
/// `series` must be in the decomposition's asset order. Increments are the
/// raw log-price increments; scale the inputs first if a volatility-neutral
/// projection is wanted.
pub fn principal_components(
    decomp: &EigenDecomposition,
    series: &[TickSeries],
) -> Result<Vec<ComplexPrincipalComponent>> {
    let grid = union_grid(decomp, series)?;
    Ok((0..decomp.n()).map(|i| project(&grid, decomp.vector(i), i)).collect())
}

/// A single component, 0-based.
pub fn principal_component(
    decomp: &EigenDecomposition,
    series: &[TickSeries],
    index: usize,
) -> Result<ComplexPrincipalComponent> {
    if index >= decomp.n() {
        return Err(Error::Config(format!("component {} does not exist (n = {})", index + 1, decomp.n())));
    }
    let grid = union_grid(decomp, series)?;
    Ok(project(&grid, decomp.vector(index), index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Session;
    use crate::matrix::ComplexMatrix;
    use crate::spectral::eig_matrix;

    fn circle(id: &str, times: Vec<f64>, prices: Vec<f64>) -> TickSeries {
        TickSeries::from_parts(id, times, prices, 10.0, vec![Session::new(0.0, 10.0)], TimeAxis::Circle).unwrap()
    }

    #[test]
    fn identity_projects_onto_single_assets() {
        let a = circle("A", vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 0.25]);
        let b = circle("B", vec![0.0, 1.5], vec![1.0, 2.0]);
        let d = eig_matrix(&["A".to_string(), "B".to_string()], &ComplexMatrix::identity(2)).unwrap();
        let cps = principal_components(&d, &[a, b]).unwrap();
        assert_eq!(cps[0].times, vec![0.0, 1.0, 1.5, 2.0]);
        for cp in &cps {
            let j = (0..2).find(|&j| d.vector(cp.index)[j].norm() > 0.5).unwrap();
            let expected: Vec<f64> = if j == 0 { vec![0.0, 0.5, 0.0, -0.25] } else { vec![0.0, 0.0, 1.0, 0.0] };
            let got: Vec<f64> = cp.increments.iter().map(|z| z.re).collect();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn single_asset_scaled_by_coefficient() {
        let a = circle("A", vec![0.0, 3.0], vec![0.0, 2.0]);
        let d = eig_matrix(&["A".to_string()], &ComplexMatrix::identity(1)).unwrap();
        let cp = principal_component(&d, &[a], 0).unwrap();
        assert_eq!(cp.increments, vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = circle("A", vec![0.0, 3.0], vec![0.0, 2.0]);
        let b = circle("B", vec![0.0, 3.0], vec![0.0, 2.0]);
        let d = eig_matrix(&["A".to_string(), "B".to_string()], &ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(principal_components(&d, &[b, a]), Err(Error::AssetMismatch(_))));
    }
}
