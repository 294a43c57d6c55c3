use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fhcorr::graph::GraphKind;
use fhcorr::io::write_text;
use fhcorr::pipeline::{self, EstimateMode, PipelineConfig, RunManifest, RunOptions, Stage};
use fhcorr::synthetic::{generate, sector_block_scenario, MarketScenario, SectorBlock};
use fhcorr::{Error, Result};

#[derive(Parser)]
#[command(name = "fhcorr", version, about = "Complex Fourier correlation and lead-lag analysis of tick data")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Seed for simulation; recorded in the manifest.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,
    /// Run directory (overrides `output` in the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic market: quotes, sectors, ground truth and a run config.
    Simulate {
        /// Scenario file (TOML). Without it a 10-asset, two-sector market is generated.
        #[arg(long, value_name = "FILE")]
        scenario: Option<PathBuf>,
    },
    /// Parse quotes into spliced log-price series.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Clock-of-day sessions, e.g. "09:00-11:30,12:30-15:00".
        #[arg(long)]
        sessions: Option<String>,
        /// Abort on malformed rows or events outside the sessions.
        #[arg(long)]
        strict: bool,
        /// Exclude assets with fewer retained events.
        #[arg(long, value_name = "N")]
        min_events: Option<usize>,
    },
    /// Estimate the complex correlation matrix from the series.
    Estimate {
        /// Cutoff time scale in seconds.
        #[arg(long)]
        tau: Option<f64>,
        /// Estimate each session separately and average.
        #[arg(long)]
        per_session: bool,
        /// Also write per-asset Fourier coefficients.
        #[arg(long)]
        dump_coefficients: bool,
    },
    /// Eigendecomposition and component classification.
    Spectrum {
        #[arg(long, value_name = "FILE")]
        sectors: Option<PathBuf>,
        #[arg(long)]
        threshold_low: Option<f64>,
        #[arg(long)]
        threshold_high: Option<f64>,
        #[arg(long)]
        sector_factor: Option<f64>,
        /// Decompose the matrix with the market mode removed.
        #[arg(long)]
        drop_market: bool,
        /// Write eigenvector coefficients for the leading M components only.
        #[arg(long, value_name = "M")]
        top: Option<usize>,
    },
    /// Filtered graphs (MST and/or PMFG) with phase orientation.
    Graph {
        #[arg(long, value_name = "FILE")]
        sectors: Option<PathBuf>,
        /// Graph kind; repeat for several.
        #[arg(long = "kind", value_name = "mst|pmfg")]
        kinds: Vec<GraphKind>,
        /// Build from the full matrix instead of removing the market mode.
        #[arg(long = "no-drop-market", visible_alias = "keep-market")]
        keep_market: bool,
        /// |θ| at or below this gives a bidirectional edge.
        #[arg(long)]
        theta_sym: Option<f64>,
    },
    /// Magnitude-phase scatter and a printed summary.
    Report {
        #[arg(long, value_name = "FILE")]
        sectors: Option<PathBuf>,
        /// Leading components to print.
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// All stages in order.
    Run {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        sessions: Option<String>,
        #[arg(long)]
        tau: Option<f64>,
        /// Skip stages whose outputs are already current.
        #[arg(long)]
        resume: bool,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Quote file.
    #[arg(long, value_name = "FILE")]
    quotes: Option<PathBuf>,
    /// Sector file (ticker,subsector,sector).
    #[arg(long, value_name = "FILE")]
    sectors: Option<PathBuf>,
}

impl InputArgs {
    fn apply(self, c: &mut PipelineConfig) {
        if self.quotes.is_some() {
            c.input.quotes = self.quotes;
        }
        if self.sectors.is_some() {
            c.input.sectors = self.sectors;
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn default_scenario(seed: u64) -> MarketScenario {
    let block = SectorBlock::new(&[("A", 5, 0.0), ("B", 5, 30.0)]);
    sector_block_scenario(&block, "09:00-11:30,12:30-15:00", seed)
}

fn simulate(scenario: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut s = match scenario {
        Some(p) => MarketScenario::from_toml(&fhcorr::io::read_text(p)?)?,
        None => default_scenario(0),
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let market = generate(&s)?;
    write_text(&out.join("quotes.csv"), &market.quotes_csv())?;
    write_text(&out.join("truth.json"), &market.truth_json())?;
    let mut config = PipelineConfig::default();
    config.input.quotes = Some("quotes.csv".into());
    config.input.sessions = Some(s.sessions.clone());
    config.output = "run".into();
    config.seed = Some(s.seed);
    if !market.sector_table.is_empty() {
        write_text(&out.join("sectors.csv"), &market.sector_table.to_csv())?;
        config.input.sectors = Some("sectors.csv".into());
    }
    write_text(&out.join("fhcorr.toml"), &config.to_toml())?;
    println!("{} events for {} assets written to {}", market.event_count(), market.quotes.len(), out.display());
    Ok(())
}

fn print_manifest(m: &RunManifest, dir: &Path) {
    println!("manifest {} ({})", m.digest, dir.join(pipeline::MANIFEST_FILE).display());
    for a in &m.artifacts {
        let files: Vec<&str> = a.files.iter().map(|f| f.path.as_str()).collect();
        println!("  {:<12} {:<8} {}", a.name, format!("{:?}", a.status).to_lowercase(), files.join(" "));
    }
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = cli.out.clone() {
        config.output = out;
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    let once = RunOptions::default();
    let (stages, options): (Vec<Stage>, RunOptions) = match cli.command {
        Command::Simulate { scenario } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("."));
            return simulate(scenario.as_deref(), cli.seed, &out);
        }
        Command::Ingest { input, sessions, strict, min_events } => {
            input.apply(&mut config);
            if sessions.is_some() {
                config.input.sessions = sessions;
            }
            config.input.strict |= strict;
            set(&mut config.input.min_events, min_events);
            (vec![Stage::Ingest], once)
        }
        Command::Estimate { tau, per_session, dump_coefficients } => {
            set(&mut config.estimate.tau, tau);
            if per_session {
                config.estimate.mode = EstimateMode::PerSession;
            }
            config.estimate.dump_coefficients |= dump_coefficients;
            (vec![Stage::Estimate], once)
        }
        Command::Spectrum { sectors, threshold_low, threshold_high, sector_factor, drop_market, top } => {
            if sectors.is_some() {
                config.input.sectors = sectors;
            }
            set(&mut config.spectrum.threshold_low, threshold_low);
            set(&mut config.spectrum.threshold_high, threshold_high);
            set(&mut config.spectrum.sector_factor, sector_factor);
            config.spectrum.drop_market |= drop_market;
            if top.is_some() {
                config.spectrum.top = top;
            }
            (vec![Stage::Spectrum], once)
        }
        Command::Graph { sectors, kinds, keep_market, theta_sym } => {
            if sectors.is_some() {
                config.input.sectors = sectors;
            }
            if !kinds.is_empty() {
                config.graph.kinds = kinds;
            }
            config.graph.drop_market &= !keep_market;
            set(&mut config.graph.theta_sym, theta_sym);
            (vec![Stage::Graph], once)
        }
        Command::Report { sectors, top } => {
            if sectors.is_some() {
                config.input.sectors = sectors;
            }
            pipeline::run_stages(&config, &[Stage::Report], &once)?;
            print!("{}", pipeline::summarize(&config, top)?);
            return Ok(());
        }
        Command::Run { input, sessions, tau, resume } => {
            input.apply(&mut config);
            if sessions.is_some() {
                config.input.sessions = sessions;
            }
            set(&mut config.estimate.tau, tau);
            (Stage::ALL.to_vec(), RunOptions { resume })
        }
    };
    let manifest = pipeline::run_stages(&config, &stages, &options)?;
    print_manifest(&manifest, &config.output);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
