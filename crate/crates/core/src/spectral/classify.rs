use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::EigenDecomposition;
use crate::ingest::SectorTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentTag {
    Immediate,
    Delayed,
    Chaotic,
}

impl fmt::Display for ComponentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentTag::Immediate => "immediate",
            ComponentTag::Delayed => "delayed",
            ComponentTag::Chaotic => "chaotic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    /// Dispersion below this (radians) is `immediate`.
    pub threshold_low: f64,
    /// Dispersion at or above this is `chaotic`.
    pub threshold_high: f64,
    /// A sector "stands out" when its mean |V_j| exceeds this multiple of the
    /// all-asset mean.
    pub sector_factor: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { threshold_low: 0.15, threshold_high: 1.0, sector_factor: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSummary {
    pub sector: String,
    pub count: usize,
    pub mean_magnitude: f64,
    /// Magnitude-weighted circular mean of `arg V_j`.
    pub mean_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentClass {
    /// 0-based component index.
    pub index: usize,
    pub eigenvalue: f64,
    pub dispersion: f64,
    pub tag: ComponentTag,
    pub sectors: Vec<SectorSummary>,
    /// Sector with the largest mean magnitude, if it stands out.
    pub dominant_sector: Option<String>,
}

/// Magnitude-weighted circular standard deviation `√(-2 ln R)` of the
/// coefficient phases, with `R = |Σ_j V_j| / Σ_j |V_j|`.
///
/// Rotating the whole vector leaves it unchanged. A zero vector has
/// dispersion 0.
pub fn phase_dispersion(v: &[Complex64]) -> f64 {
    let total: f64 = v.iter().map(|z| z.norm()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let r = (v.iter().sum::<Complex64>().norm() / total).min(1.0);
    if r == 0.0 {
        return f64::INFINITY;
    }
    (-2.0 * r.ln()).max(0.0).sqrt()
}

fn sector_summaries(assets: &[String], v: &[Complex64], sectors: &SectorTable) -> Vec<SectorSummary> {
    let mut groups: BTreeMap<&str, Vec<Complex64>> = BTreeMap::new();
    for (a, &z) in assets.iter().zip(v) {
        if let Some(s) = sectors.sector_of(a) {
            groups.entry(s).or_default().push(z);
        }
    }
    groups
        .into_iter()
        .map(|(sector, zs)| SectorSummary {
            sector: sector.to_string(),
            count: zs.len(),
            mean_magnitude: zs.iter().map(|z| z.norm()).sum::<f64>() / zs.len() as f64,
            mean_phase: zs.iter().sum::<Complex64>().arg(),
        })
        .collect()
}

/// Tag every component as immediate, delayed or chaotic.
///
/// `immediate`: dispersion < `threshold_low`. `delayed`: dispersion in
/// `[threshold_low, threshold_high)` and some sector's mean magnitude above
/// `sector_factor` times the all-asset mean. Anything else is `chaotic`.
/// Assets missing from `sectors` count toward the all-asset mean only.
pub fn classify_components(
    decomp: &EigenDecomposition,
    config: &ClassifyConfig,
    sectors: &SectorTable,
) -> Vec<ComponentClass> {
    let assets = decomp.assets();
    (0..decomp.n())
        .map(|i| {
            let v = decomp.vector(i);
            let dispersion = phase_dispersion(v);
            let overall = v.iter().map(|z| z.norm()).sum::<f64>() / v.len() as f64;
            let summaries = sector_summaries(assets, v, sectors);
            let dominant_sector = summaries
                .iter()
                .filter(|s| s.mean_magnitude > config.sector_factor * overall)
                .max_by(|a, b| a.mean_magnitude.total_cmp(&b.mean_magnitude))
                .map(|s| s.sector.clone());
            let tag = if dispersion < config.threshold_low {
                ComponentTag::Immediate
            } else if dispersion < config.threshold_high && dominant_sector.is_some() {
                ComponentTag::Delayed
            } else {
                ComponentTag::Chaotic
            };
            ComponentClass {
                index: i,
                eigenvalue: decomp.eigenvalues()[i],
                dispersion,
                tag,
                sectors: summaries,
                dominant_sector,
            }
        })
        .collect()
}
