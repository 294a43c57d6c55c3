use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::graph::{GraphKind, DEFAULT_THETA_SYM};
use crate::io::read_text;
use crate::spectral::ClassifyConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Quote file in the ingest format.
    pub quotes: Option<PathBuf>,
    /// `ticker,subsector,sector` file. A missing file is a warning, not an error.
    pub sectors: Option<PathBuf>,
    /// Clock-of-day sessions repeated on every day of the file. Without it a
    /// single session covering all quotes is used.
    pub sessions: Option<String>,
    /// Abort on malformed rows and on events outside the sessions.
    pub strict: bool,
    /// Assets with fewer retained events are excluded.
    pub min_events: usize,
    pub delimiter: char,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self { quotes: None, sectors: None, sessions: None, strict: false, min_events: 2, delimiter: ',' }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMode {
    /// Concatenate the sessions into one trading clock.
    #[default]
    Splice,
    /// Estimate each session separately and average.
    PerSession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    /// Cutoff time scale τ in seconds.
    pub tau: f64,
    pub mode: EstimateMode,
    /// Also write per-asset coefficient dumps under `coefficients/`.
    pub dump_coefficients: bool,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self { tau: EstimatorConfig::DEFAULT_TAU, mode: EstimateMode::Splice, dump_coefficients: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Dispersion below this (radians) is `immediate`.
    pub threshold_low: f64,
    /// Dispersion at or above this is `chaotic`.
    pub threshold_high: f64,
    /// Sector prominence needed for a `delayed` tag.
    pub sector_factor: f64,
    /// Decompose the matrix with the market mode removed (unit diagonal restored).
    pub drop_market: bool,
    /// Write eigenvector coefficients for the leading components only.
    pub top: Option<usize>,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        let c = ClassifyConfig::default();
        Self {
            threshold_low: c.threshold_low,
            threshold_high: c.threshold_high,
            sector_factor: c.sector_factor,
            drop_market: false,
            top: None,
        }
    }
}

impl SpectrumSection {
    pub fn classify(&self) -> ClassifyConfig {
        ClassifyConfig {
            threshold_low: self.threshold_low,
            threshold_high: self.threshold_high,
            sector_factor: self.sector_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSection {
    pub kinds: Vec<GraphKind>,
    /// Remove the market mode before filtering.
    pub drop_market: bool,
    /// Edges with |θ| at or below this are bidirectional.
    pub theta_sym: f64,
}

impl Default for GraphSection {
    fn default() -> Self {
        Self { kinds: vec![GraphKind::Mst, GraphKind::Pmfg], drop_market: true, theta_sym: DEFAULT_THETA_SYM }
    }
}

/// Everything a pipeline run depends on besides the input files themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub estimate: EstimateConfig,
    pub spectrum: SpectrumSection,
    pub graph: GraphSection,
    /// Run directory for all artifacts and the manifest.
    pub output: PathBuf,
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: InputConfig::default(),
            estimate: EstimateConfig::default(),
            spectrum: SpectrumSection::default(),
            graph: GraphSection::default(),
            output: PathBuf::from("fhcorr-out"),
            seed: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("pipeline config: {e}")))
    }

    /// Read a TOML config; relative paths in it are taken from the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::from_toml(&read_text(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = c.input.quotes.as_mut() {
            rebase(p);
        }
        if let Some(p) = c.input.sectors.as_mut() {
            rebase(p);
        }
        rebase(&mut c.output);
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let tau = self.estimate.tau;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        let s = &self.spectrum;
        if !(0.0 <= s.threshold_low && s.threshold_low <= s.threshold_high) {
            return Err(Error::Config("need 0 ≤ threshold_low ≤ threshold_high".into()));
        }
        if self.graph.theta_sym.is_nan() || self.graph.theta_sym < 0.0 {
            return Err(Error::Config("theta_sym must be non-negative".into()));
        }
        if s.top == Some(0) {
            return Err(Error::Config("top must be at least 1".into()));
        }
        if !self.input.delimiter.is_ascii() {
            return Err(Error::Config("delimiter must be an ASCII character".into()));
        }
        Ok(())
    }

    /// Parameters that determine the artifacts, paths excluded.
    pub fn snapshot(&self) -> ConfigSnapshot {
        ConfigSnapshot {
            tau: self.estimate.tau,
            mode: self.estimate.mode,
            sessions: self.input.sessions.clone(),
            strict: self.input.strict,
            min_events: self.input.min_events,
            delimiter: self.input.delimiter,
            thresholds: self.spectrum.classify(),
            spectrum_drop_market: self.spectrum.drop_market,
            top: self.spectrum.top,
            graph_kinds: self.graph.kinds.clone(),
            drop_market: self.graph.drop_market,
            theta_sym: self.graph.theta_sym,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub tau: f64,
    pub mode: EstimateMode,
    pub sessions: Option<String>,
    pub strict: bool,
    pub min_events: usize,
    pub delimiter: char,
    pub thresholds: ClassifyConfig,
    pub spectrum_drop_market: bool,
    pub top: Option<usize>,
    pub graph_kinds: Vec<GraphKind>,
    pub drop_market: bool,
    pub theta_sym: f64,
    pub seed: Option<u64>,
}
