//! Stage orchestration: ingest → estimate → spectrum → graph → report.
//!
//! A run directory holds the stage outputs plus `manifest.json`. Every
//! output starts with the run digest (tool version, configuration snapshot
//! and input contents). A stage reads its input only from the previous
//! stage's files, so deleting downstream outputs and resuming reproduces
//! them byte for byte. With `resume`, a stage whose files all carry the
//! current digest is skipped.

mod config;
mod manifest;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{
    ConfigSnapshot, EstimateConfig, EstimateMode, GraphSection, InputConfig, PipelineConfig, SpectrumSection,
};
pub use manifest::{
    artifact_manifest_ref, file_sha256, run_digest, sha256_hex, Artifact, ArtifactFile, ArtifactStatus, InputDigest,
    RunManifest, StageRecord, StageStatus, TOOL_VERSION,
};

use crate::error::{Error, Result};
use crate::estimator::{
    all_coefficients, complex_covariance_matrix, covariance_to_correlation, estimate_per_session, unit_diagonal,
    ComplexCorrelationMatrix, EstimatorConfig,
};
use crate::graph::{self, GraphConfig, GraphKind, ScatterRow};
use crate::ingest::{
    self, covering_session, parse_quotes, parse_sessions, rescale_to_circle, series_from_quotes, ColumnSchema,
    OnMalformed, ParseOptions, SectorTable, Session,
};
use crate::io::{self, MatrixFile, MatrixKind};
use crate::spectral::{self, ComponentTag};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Artifact names in stage order.
pub const ARTIFACTS: [&str; 6] = ["series", "matrix", "eigenvalues", "eigenvectors", "graph", "scatter"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Ingest,
    Estimate,
    Spectrum,
    Graph,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Ingest, Stage::Estimate, Stage::Spectrum, Stage::Graph, Stage::Report];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Estimate => "estimate",
            Stage::Spectrum => "spectrum",
            Stage::Graph => "graph",
            Stage::Report => "report",
        }
    }

    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &["series"],
            Stage::Estimate => &["matrix"],
            Stage::Spectrum => &["eigenvalues", "eigenvectors"],
            Stage::Graph => &["graph"],
            Stage::Report => &["scatter"],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// File names (relative to the run directory) making up an artifact.
pub fn artifact_files(config: &PipelineConfig, artifact: &str) -> Vec<String> {
    match artifact {
        "series" => vec!["series.txt".into()],
        "matrix" => vec!["matrix.txt".into()],
        "eigenvalues" => vec!["eigenvalues.csv".into()],
        "eigenvectors" => vec!["eigenvectors.csv".into()],
        "graph" => config
            .graph
            .kinds
            .iter()
            .flat_map(|k| ["graphml", "dot", "edges.csv", "degrees.csv"].map(|ext| format!("{k}.{ext}")))
            .collect(),
        "scatter" => vec!["scatter.csv".into()],
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Skip stages whose outputs already carry the current digest.
    pub resume: bool,
}

type Counters = BTreeMap<String, u64>;

struct Run<'a> {
    config: &'a PipelineConfig,
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn digest(&self) -> &str {
        &self.manifest.digest
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        io::write_text(&self.path(name), text)
    }

    /// Read an upstream file, warning if it was written under another digest.
    fn read_upstream(&mut self, name: &str) -> Result<String> {
        let path = self.path(name);
        if !path.exists() {
            return Err(Error::Config(format!("{} not found; run the previous stage first", path.display())));
        }
        let text = io::read_text(&path)?;
        let found = artifact_manifest_ref(&text).map(str::to_string);
        if found.as_deref() != Some(self.digest()) {
            let msg = format!("{name} was written by a run with different inputs or configuration");
            self.manifest.warn(msg);
        }
        Ok(text)
    }

    fn file_is_current(&self, name: &str) -> bool {
        io::read_text(&self.path(name)).is_ok_and(|t| artifact_manifest_ref(&t) == Some(self.digest()))
    }

    fn stage_is_current(&self, stage: Stage) -> bool {
        stage.artifacts().iter().flat_map(|a| artifact_files(self.config, a)).all(|f| self.file_is_current(&f))
    }

    fn refresh_artifacts(&mut self) -> Result<()> {
        let mut artifacts = Vec::with_capacity(ARTIFACTS.len());
        for name in ARTIFACTS {
            let mut files = Vec::new();
            let (mut current, mut present) = (0, 0);
            let names = artifact_files(self.config, name);
            for f in &names {
                let path = self.path(f);
                let mut sha256 = None;
                if path.exists() {
                    present += 1;
                    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                    let text = String::from_utf8_lossy(&bytes);
                    if artifact_manifest_ref(&text) == Some(self.digest()) {
                        current += 1;
                        sha256 = Some(sha256_hex(&bytes));
                    }
                }
                files.push(ArtifactFile { path: f.clone(), sha256 });
            }
            let status = if current == names.len() && !names.is_empty() {
                ArtifactStatus::Complete
            } else if present == 0 {
                ArtifactStatus::Missing
            } else {
                ArtifactStatus::Partial
            };
            artifacts.push(Artifact { name: name.to_string(), status, files });
        }
        self.manifest.artifacts = artifacts;
        Ok(())
    }

    fn save_manifest(&mut self) -> Result<()> {
        self.refresh_artifacts()?;
        io::write_text(&self.path(MANIFEST_FILE), &self.manifest.to_json())
    }

    fn sectors(&mut self) -> Result<SectorTable> {
        let Some(path) = self.config.input.sectors.clone() else {
            return Ok(SectorTable::new());
        };
        if !path.exists() {
            self.manifest.warn(format!("sector file {} not found; nodes carry no sector labels", path.display()));
            return Ok(SectorTable::new());
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        SectorTable::parse(BufReader::new(file))
    }

    fn correlation(&mut self) -> Result<ComplexCorrelationMatrix> {
        let file = MatrixFile::parse(&self.read_upstream("matrix.txt")?)?;
        match file.kind {
            MatrixKind::Correlation => ComplexCorrelationMatrix::new(file.assets, file.matrix),
            MatrixKind::Covariance => unit_diagonal(&file.assets, &file.matrix),
        }
    }
}

/// Digests of the configured input files. A configured quote file must
/// exist; a missing sector file is left out (the stages warn about it).
fn input_digests(config: &PipelineConfig) -> Result<Vec<InputDigest>> {
    let mut out = Vec::new();
    if let Some(q) = &config.input.quotes {
        out.push(InputDigest { role: "quotes".into(), path: q.display().to_string(), sha256: file_sha256(q)? });
    }
    if let Some(s) = config.input.sectors.as_ref().filter(|s| s.exists()) {
        out.push(InputDigest { role: "sectors".into(), path: s.display().to_string(), sha256: file_sha256(s)? });
    }
    Ok(out)
}

/// Run every stage in order.
pub fn run_pipeline(config: &PipelineConfig, options: &RunOptions) -> Result<RunManifest> {
    run_stages(config, &Stage::ALL, options)
}

/// Run the given stages (in pipeline order) inside `config.output`. The
/// manifest is rewritten after every stage; on failure the failing stage is
/// recorded with its error and the partial artifact set before returning.
pub fn run_stages(config: &PipelineConfig, stages: &[Stage], options: &RunOptions) -> Result<RunManifest> {
    config.validate()?;
    let stages: BTreeSet<Stage> = stages.iter().copied().collect();
    let mut manifest = RunManifest::new(config.snapshot(), input_digests(config)?);
    let dir = config.output.clone();
    if let Ok(prev) = io::read_text(&dir.join(MANIFEST_FILE)).and_then(|t| RunManifest::from_json(&t)) {
        if prev.digest == manifest.digest {
            manifest.stages = prev.stages;
        }
    }
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut run = Run { config, dir, manifest };

    for stage in stages {
        if options.resume && run.stage_is_current(stage) {
            log::info!("{stage}: outputs current, skipping");
            let counters = run.manifest.stage(stage.name()).map(|s| s.counters.clone()).unwrap_or_default();
            run.manifest.record_stage(StageRecord {
                name: stage.name().into(),
                status: StageStatus::Reused,
                seconds: 0.0,
                counters,
                error: None,
            });
            continue;
        }
        log::info!("{stage}: running");
        let t0 = Instant::now();
        let result = match stage {
            Stage::Ingest => ingest_stage(&mut run),
            Stage::Estimate => estimate_stage(&mut run),
            Stage::Spectrum => spectrum_stage(&mut run),
            Stage::Graph => graph_stage(&mut run),
            Stage::Report => report_stage(&mut run),
        };
        let seconds = t0.elapsed().as_secs_f64();
        match result {
            Ok(counters) => run.manifest.record_stage(StageRecord {
                name: stage.name().into(),
                status: StageStatus::Complete,
                seconds,
                counters,
                error: None,
            }),
            Err(e) => {
                run.manifest.record_stage(StageRecord {
                    name: stage.name().into(),
                    status: StageStatus::Failed,
                    seconds,
                    counters: Counters::new(),
                    error: Some(e.to_string()),
                });
                run.save_manifest()?;
                return Err(e);
            }
        }
        run.save_manifest()?;
    }
    run.save_manifest()?;
    Ok(run.manifest)
}

/// Sessions for every calendar day that has at least one event; times are
/// absolute seconds (parse origin 0).
fn sessions_for_days(clock: &[Session], quotes: &ingest::ParsedQuotes) -> Vec<Session> {
    let days: BTreeSet<i64> =
        quotes.assets.values().flat_map(|evs| evs.iter().map(|e| e.time.div_euclid(86_400))).collect();
    days.into_iter()
        .flat_map(|d| {
            clock.iter().map(move |s| Session::new(s.start + (d * 86_400) as f64, s.end + (d * 86_400) as f64))
        })
        .collect()
}

fn ingest_stage(run: &mut Run) -> Result<Counters> {
    let input = &run.config.input;
    let path = input.quotes.clone().ok_or_else(|| Error::Config("no quote file configured".into()))?;
    let opts = ParseOptions {
        schema: ColumnSchema { delimiter: input.delimiter as u8, ..Default::default() },
        detect_header: true,
        on_malformed: if input.strict { OnMalformed::Abort } else { OnMalformed::Skip },
        origin: input.sessions.as_ref().map(|_| 0),
    };
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let quotes = parse_quotes(BufReader::new(file), &opts)?;
    if !quotes.malformed.is_empty() {
        let first = &quotes.malformed[0];
        run.manifest.warn(format!(
            "{} malformed rows skipped (first at line {}: {})",
            quotes.malformed.len(),
            first.line,
            first.message
        ));
    }
    let sessions = match &input.sessions {
        Some(spec) => sessions_for_days(&parse_sessions(spec)?, &quotes),
        None => covering_session(&quotes).into_iter().collect(),
    };
    if sessions.is_empty() {
        return Err(Error::Config(format!("{}: no valid quotes", path.display())));
    }
    let (series, stats) = series_from_quotes(&quotes, &sessions, input.strict, input.min_events)?;
    if !stats.excluded_assets.is_empty() {
        let shown: Vec<&str> = stats.excluded_assets.iter().take(10).map(String::as_str).collect();
        let more = stats.excluded_assets.len().saturating_sub(shown.len());
        let tail = if more > 0 { format!(" and {more} more") } else { String::new() };
        run.manifest.warn(format!("excluded assets with too few events: {}{tail}", shown.join(", ")));
    }
    if series.is_empty() {
        return Err(Error::Config("no asset has enough events".into()));
    }
    let text = io::series_to_string(&series, Some(run.digest()))?;
    run.write("series.txt", &text)?;
    Ok(Counters::from([
        ("rows".into(), stats.rows as u64),
        ("events_read".into(), stats.events as u64),
        ("events_retained".into(), stats.retained_events as u64),
        ("events_dropped".into(), stats.dropped_outside_sessions as u64),
        ("rows_malformed".into(), stats.malformed as u64),
        ("rows_crossed".into(), stats.crossed as u64),
        ("assets".into(), series.len() as u64),
        ("assets_excluded".into(), stats.excluded_assets.len() as u64),
        ("sessions".into(), sessions.len() as u64),
    ]))
}

fn estimate_stage(run: &mut Run) -> Result<Counters> {
    let series = io::parse_series(&run.read_upstream("series.txt")?)?;
    let est = &run.config.estimate;
    let cov = match est.mode {
        EstimateMode::Splice => {
            let t_span = series.first().ok_or_else(|| Error::Config("series file is empty".into()))?.t_span();
            let config = EstimatorConfig::new(est.tau, t_span)?;
            let rescaled = series.iter().map(rescale_to_circle).collect::<Result<Vec<_>>>()?;
            let coeffs = all_coefficients(&rescaled, &config)?;
            if est.dump_coefficients {
                for c in &coeffs {
                    let text = io::coefficients_to_string(c, Some(run.digest()));
                    run.write(&format!("coefficients/{}.txt", c.asset_id), &text)?;
                }
            }
            complex_covariance_matrix(&coeffs, &config)?
        }
        EstimateMode::PerSession => estimate_per_session(&series, est.tau)?,
    };
    let rho = covariance_to_correlation(&cov)?;
    let file = MatrixFile::from_correlation(&rho, cov.tau, cov.t_span, cov.harmonics);
    run.write("matrix.txt", &file.to_string(Some(run.digest()))?)?;
    Ok(Counters::from([
        ("assets".into(), series.len() as u64),
        ("events".into(), series.iter().map(|s| s.len() as u64).sum()),
        ("harmonics".into(), cov.harmonics as u64),
    ]))
}

fn spectrum_stage(run: &mut Run) -> Result<Counters> {
    let rho = run.correlation()?;
    let sectors = run.sectors()?;
    let section = run.config.spectrum;
    let rho = graph::graph_matrix(&rho, section.drop_market)?;
    let decomp = spectral::eig_hermitian(&rho)?;
    let classes = spectral::classify_components(&decomp, &section.classify(), &sectors);
    run.write("eigenvalues.csv", &spectral::eigenvalues_to_csv(&classes, Some(run.digest())))?;
    let vectors = spectral::eigenvectors_to_csv(&decomp, &sectors, section.top, Some(run.digest()));
    run.write("eigenvectors.csv", &vectors)?;
    let count = |t: ComponentTag| classes.iter().filter(|c| c.tag == t).count() as u64;
    Ok(Counters::from([
        ("assets".into(), rho.n() as u64),
        ("immediate".into(), count(ComponentTag::Immediate)),
        ("delayed".into(), count(ComponentTag::Delayed)),
        ("chaotic".into(), count(ComponentTag::Chaotic)),
    ]))
}

fn graph_stage(run: &mut Run) -> Result<Counters> {
    let rho = run.correlation()?;
    let sectors = run.sectors()?;
    let section = &run.config.graph;
    let config = GraphConfig { drop_market: section.drop_market, theta_sym: section.theta_sym };
    let m = graph::graph_matrix(&rho, config.drop_market)?;
    let mut counters = Counters::new();
    for &kind in &section.kinds {
        let g = match kind {
            GraphKind::Mst => graph::max_spanning_tree(&m)?,
            GraphKind::Pmfg => graph::pmfg(&m)?,
        };
        let g = graph::orient_edges(g, &m, config.theta_sym).with_sectors(&sectors);
        let d = Some(run.digest());
        run.write(&format!("{kind}.graphml"), &graph::to_graphml(&g, d))?;
        run.write(&format!("{kind}.dot"), &graph::to_dot(&g, d))?;
        run.write(&format!("{kind}.edges.csv"), &graph::edges_to_csv(&g, d))?;
        run.write(&format!("{kind}.degrees.csv"), &graph::degrees_to_csv(&graph::degree_report(&g), d))?;
        counters.insert(format!("{kind}_edges"), g.edges.len() as u64);
        counters.insert(format!("{kind}_bidirectional"), g.edges.iter().filter(|e| e.bidirectional).count() as u64);
    }
    Ok(counters)
}

fn report_stage(run: &mut Run) -> Result<Counters> {
    let rho = run.correlation()?;
    let sectors = run.sectors()?;
    let rows = graph::magnitude_phase_scatter(&rho, &sectors);
    run.write("scatter.csv", &graph::scatter_to_csv(&rows, Some(run.digest())))?;
    let same = rows.iter().filter(|r| r.same_sector == Some(true)).count() as u64;
    Ok(Counters::from([("pairs".into(), rows.len() as u64), ("same_sector_pairs".into(), same)]))
}

/// Mean magnitude and mean |θ| over a set of pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub count: usize,
    pub mean_magnitude: f64,
    pub mean_abs_theta: f64,
}

impl PairStats {
    pub fn of<'a>(rows: impl IntoIterator<Item = &'a ScatterRow>) -> Option<Self> {
        let (mut count, mut s, mut t) = (0usize, 0.0, 0.0);
        for r in rows {
            count += 1;
            s += r.magnitude;
            t += r.theta.abs();
        }
        (count > 0).then(|| Self { count, mean_magnitude: s / count as f64, mean_abs_theta: t / count as f64 })
    }
}

/// Human-readable digest of a finished run.
#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub assets: usize,
    pub harmonics: usize,
    pub tau: f64,
    /// `(component, eigenvalue, dispersion, tag)` for the leading components, 1-based.
    pub leading: Vec<(usize, f64, f64, ComponentTag)>,
    pub same_sector: Option<PairStats>,
    pub cross_sector: Option<PairStats>,
}

impl fmt::Display for ReportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "assets {}  harmonics {}  tau {} s", self.assets, self.harmonics, self.tau)?;
        writeln!(f, "component  eigenvalue  dispersion  tag")?;
        for (i, l, d, t) in &self.leading {
            writeln!(f, "{i:>9}  {l:>10.4}  {d:>10.4}  {t}")?;
        }
        for (name, s) in [("same-sector", &self.same_sector), ("cross-sector", &self.cross_sector)] {
            if let Some(s) = s {
                writeln!(
                    f,
                    "{name} pairs {}: mean s {:.4}, mean |theta| {:.4}",
                    s.count, s.mean_magnitude, s.mean_abs_theta
                )?;
            }
        }
        Ok(())
    }
}

/// Summarise the matrix of a run directory: leading components and
/// same/cross-sector pair statistics.
pub fn summarize(config: &PipelineConfig, leading: usize) -> Result<ReportSummary> {
    let path = config.output.join("matrix.txt");
    let file = MatrixFile::parse(&io::read_text(&path)?)?;
    let (tau, harmonics) = (file.tau, file.harmonics);
    let rho = match file.kind {
        MatrixKind::Correlation => ComplexCorrelationMatrix::new(file.assets, file.matrix)?,
        MatrixKind::Covariance => unit_diagonal(&file.assets, &file.matrix)?,
    };
    let sectors = match &config.input.sectors {
        Some(p) if p.exists() => SectorTable::parse(BufReader::new(File::open(p).map_err(|e| Error::io(p, e))?))?,
        _ => SectorTable::new(),
    };
    let decomp = spectral::eig_hermitian(&rho)?;
    let classes = spectral::classify_components(&decomp, &config.spectrum.classify(), &sectors);
    let rows = graph::magnitude_phase_scatter(&rho, &sectors);
    Ok(ReportSummary {
        assets: rho.n(),
        harmonics,
        tau,
        leading: classes.iter().take(leading).map(|c| (c.index + 1, c.eigenvalue, c.dispersion, c.tag)).collect(),
        same_sector: PairStats::of(rows.iter().filter(|r| r.same_sector == Some(true))),
        cross_sector: PairStats::of(rows.iter().filter(|r| r.same_sector == Some(false))),
    })
}

/// Resolve `path` against the run directory unless it is absolute.
pub fn in_run_dir(config: &PipelineConfig, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        config.output.join(path)
    }
}
