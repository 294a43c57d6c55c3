//! Seeded generator of asynchronous quote streams with known lead-lag
//! structure.
//!
//! Latent factors `B_f` are unit-volatility random walks on a fine grid in
//! trading time (session gaps are skipped). Asset `i` has latent log price
//!
//! ```text
//! ln P0_i + price_scale · (Σ_f β_if · B_f(u - δ_if) + η_i · W_i(u))
//! ```
//!
//! observed at Poisson(λ_i) arrivals whose timestamps are floored to the
//! quantum. Quotes are `mid · (1 ∓ half_spread)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, parse_sessions, ParsedQuotes, QuoteEvent, SectorTable, Session, TickSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub factor: usize,
    pub beta: f64,
    /// Delay in seconds of this asset's response to the factor.
    #[serde(default)]
    pub lag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetSpec {
    pub id: String,
    #[serde(default)]
    pub loadings: Vec<Loading>,
    #[serde(default)]
    pub eta: f64,
    /// Quote arrivals per second.
    pub intensity: f64,
    #[serde(default = "default_p0")]
    pub p0: f64,
    #[serde(default)]
    pub sector: Option<String>,
    #[serde(default)]
    pub subsector: Option<String>,
}

fn default_p0() -> f64 {
    100.0
}

fn default_sessions() -> String {
    "09:00-11:30".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketScenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "MarketScenario::default_factors")]
    pub factors: usize,
    /// Clock-of-day session list, e.g. `"09:00-11:30,12:30-15:00"`.
    #[serde(default = "default_sessions")]
    pub sessions: String,
    #[serde(default = "MarketScenario::default_days")]
    pub days: usize,
    /// Timestamp quantum in whole seconds.
    #[serde(default = "MarketScenario::default_quantum")]
    pub quantum: u32,
    /// Factor grid step in seconds.
    #[serde(default = "MarketScenario::default_grid")]
    pub grid: f64,
    /// Log-price units per unit of latent process.
    #[serde(default = "MarketScenario::default_price_scale")]
    pub price_scale: f64,
    #[serde(default = "MarketScenario::default_half_spread")]
    pub half_spread: f64,
    pub assets: Vec<AssetSpec>,
}

impl MarketScenario {
    fn default_factors() -> usize {
        1
    }
    fn default_days() -> usize {
        1
    }
    fn default_quantum() -> u32 {
        1
    }
    fn default_grid() -> f64 {
        0.1
    }
    fn default_price_scale() -> f64 {
        1e-3
    }
    fn default_half_spread() -> f64 {
        1e-4
    }

    /// Empty scenario with default layout and the given sessions.
    pub fn new(sessions: &str, seed: u64) -> Self {
        Self {
            seed,
            factors: 1,
            sessions: sessions.to_string(),
            days: 1,
            quantum: 1,
            grid: Self::default_grid(),
            price_scale: Self::default_price_scale(),
            half_spread: Self::default_half_spread(),
            assets: Vec::new(),
        }
    }

    /// One common factor: asset `i` gets `β_i`, lag `δ_i`, `η_i`, `λ_i`.
    /// Tickers are `S000`, `S001`, ...
    pub fn one_factor(
        betas: &[f64],
        lags: &[f64],
        etas: &[f64],
        intensities: &[f64],
        sessions: &str,
        seed: u64,
    ) -> Self {
        let mut s = Self::new(sessions, seed);
        s.assets = (0..betas.len())
            .map(|i| AssetSpec {
                id: format!("S{i:03}"),
                loadings: vec![Loading { factor: 0, beta: betas[i], lag: lags[i] }],
                eta: etas[i],
                intensity: intensities[i],
                p0: default_p0(),
                sector: None,
                subsector: None,
            })
            .collect();
        s
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        file.resolve()
    }

    pub fn session_layout(&self) -> Result<Vec<Session>> {
        let clock = parse_sessions(&self.sessions)?;
        if self.days == 0 {
            return Err(Error::Config("scenario needs at least one day".into()));
        }
        if let Some(s) = clock.iter().find(|s| s.end > 86_400.0 || s.start < 0.0) {
            return Err(Error::Config(format!("session {}-{} does not fit in a day", s.start, s.end)));
        }
        Ok(ingest::daily_sessions(&clock, self.days, 0))
    }

    pub fn validate(&self) -> Result<()> {
        let sessions = self.session_layout()?;
        if sessions.iter().any(|s| s.end <= s.start) {
            return Err(Error::ZeroDuration);
        }
        if self.quantum == 0 {
            return Err(Error::Config("quantum must be at least one second".into()));
        }
        if !(self.grid > 0.0 && self.grid.is_finite()) {
            return Err(Error::Config(format!("grid step must be positive, got {}", self.grid)));
        }
        if !(self.price_scale > 0.0 && self.price_scale.is_finite()) {
            return Err(Error::Config("price_scale must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.half_spread) {
            return Err(Error::Config("half_spread must lie in [0, 0.5)".into()));
        }
        if self.assets.is_empty() {
            return Err(Error::Config("scenario has no assets".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.assets {
            let bad = |m: &str| Err(Error::Config(format!("asset {}: {m}", a.id)));
            if a.id.is_empty() || a.id.contains([',', '\n', '"']) {
                return bad("ticker must be non-empty without commas or quotes");
            }
            if !seen.insert(&a.id) {
                return bad("duplicate ticker");
            }
            if !(a.intensity > 0.0 && a.intensity.is_finite()) {
                return bad("intensity must be positive");
            }
            if !(a.eta >= 0.0 && a.eta.is_finite()) {
                return bad("eta must be non-negative");
            }
            if !(a.p0 > 0.0 && a.p0.is_finite()) {
                return bad("p0 must be positive");
            }
            for l in &a.loadings {
                if l.factor >= self.factors {
                    return bad("loading refers to a missing factor");
                }
                if !(l.lag >= 0.0 && l.lag.is_finite()) {
                    return bad("lag must be non-negative");
                }
                if !l.beta.is_finite() {
                    return bad("beta must be finite");
                }
            }
        }
        Ok(())
    }

    pub fn sector_table(&self) -> SectorTable {
        let mut t = SectorTable::new();
        for a in &self.assets {
            if let Some(s) = &a.sector {
                let sub = a.subsector.as_deref().unwrap_or(s);
                t.insert(&a.id, sub, s).expect("tickers validated unique");
            }
        }
        t
    }
}

/// One sector of a [`SectorBlock`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub name: String,
    pub size: usize,
    /// Delay of the whole sector (market and sector factor), seconds.
    #[serde(default)]
    pub lag: f64,
    /// Loading on the sector factor; the block's `sector_beta` if absent.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Loading on the market factor; the block's `market_beta` if absent.
    #[serde(default)]
    pub market_beta: Option<f64>,
    /// Idiosyncratic volatility; the block's `eta` if absent.
    #[serde(default)]
    pub eta: Option<f64>,
}

/// Two-level factor market: one market factor plus one factor per sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBlock {
    pub sectors: Vec<SectorSpec>,
    /// Extra delay per member rank inside a sector, seconds.
    #[serde(default)]
    pub intra_lag: f64,
    #[serde(default = "SectorBlock::default_market_beta")]
    pub market_beta: f64,
    #[serde(default = "SectorBlock::default_sector_beta")]
    pub sector_beta: f64,
    #[serde(default = "SectorBlock::default_eta")]
    pub eta: f64,
    #[serde(default = "SectorBlock::default_intensity")]
    pub intensity: f64,
}

impl SectorBlock {
    fn default_market_beta() -> f64 {
        1.0
    }
    fn default_sector_beta() -> f64 {
        1.0
    }
    fn default_eta() -> f64 {
        0.5
    }
    fn default_intensity() -> f64 {
        1.0
    }

    /// Sectors of the given sizes and lags, all other parameters default.
    pub fn new(sectors: &[(&str, usize, f64)]) -> Self {
        Self {
            sectors: sectors
                .iter()
                .map(|&(n, size, lag)| SectorSpec {
                    name: n.to_string(),
                    size,
                    lag,
                    beta: None,
                    market_beta: None,
                    eta: None,
                })
                .collect(),
            intra_lag: 0.0,
            market_beta: Self::default_market_beta(),
            sector_beta: Self::default_sector_beta(),
            eta: Self::default_eta(),
            intensity: Self::default_intensity(),
        }
    }
}

/// Expand a sector block into a scenario. Factor 0 is the market; factor
/// `s + 1` belongs to sector `s` (omitted when there is a single sector).
/// Member `r` of sector `s` responds to both with delay
/// `lag_s + r · intra_lag`. Tickers are `<sector><rank>`.
pub fn sector_block_scenario(block: &SectorBlock, sessions: &str, seed: u64) -> MarketScenario {
    let single = block.sectors.len() == 1;
    let mut scenario = MarketScenario::new(sessions, seed);
    scenario.factors = if single { 1 } else { 1 + block.sectors.len() };
    for (s, spec) in block.sectors.iter().enumerate() {
        for r in 0..spec.size {
            let lag = spec.lag + r as f64 * block.intra_lag;
            let mut loadings = vec![Loading { factor: 0, beta: spec.market_beta.unwrap_or(block.market_beta), lag }];
            if !single {
                loadings.push(Loading { factor: s + 1, beta: spec.beta.unwrap_or(block.sector_beta), lag });
            }
            scenario.assets.push(AssetSpec {
                id: format!("{}{:02}", spec.name, r),
                loadings,
                eta: spec.eta.unwrap_or(block.eta),
                intensity: block.intensity,
                p0: default_p0(),
                sector: Some(spec.name.clone()),
                subsector: Some(spec.name.clone()),
            });
        }
    }
    scenario
}

/// Scenario file: either explicit `[[assets]]` or a `[sector_block]` table.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    seed: Option<u64>,
    factors: Option<usize>,
    sessions: Option<String>,
    days: Option<usize>,
    quantum: Option<u32>,
    grid: Option<f64>,
    price_scale: Option<f64>,
    half_spread: Option<f64>,
    #[serde(default)]
    assets: Vec<AssetSpec>,
    sector_block: Option<SectorBlock>,
}

impl ScenarioFile {
    fn resolve(self) -> Result<MarketScenario> {
        let sessions = self.sessions.unwrap_or_else(default_sessions);
        let seed = self.seed.unwrap_or(0);
        let mut s = match self.sector_block {
            Some(block) => {
                if !self.assets.is_empty() || self.factors.is_some() {
                    return Err(Error::Config("scenario: use either assets or sector_block, not both".into()));
                }
                sector_block_scenario(&block, &sessions, seed)
            }
            None => {
                let mut s = MarketScenario::new(&sessions, seed);
                s.factors = self.factors.unwrap_or(1);
                s.assets = self.assets;
                s
            }
        };
        if let Some(v) = self.days {
            s.days = v;
        }
        if let Some(v) = self.quantum {
            s.quantum = v;
        }
        if let Some(v) = self.grid {
            s.grid = v;
        }
        if let Some(v) = self.price_scale {
            s.price_scale = v;
        }
        if let Some(v) = self.half_spread {
            s.half_spread = v;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub factors: usize,
    pub sessions: String,
    pub days: usize,
    pub assets: Vec<AssetSpec>,
    /// Events emitted per asset, in asset order.
    pub events: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SyntheticMarket {
    /// Quotes per ticker; times are absolute seconds (day `d` starts at
    /// `86400·d`).
    pub quotes: BTreeMap<String, Vec<QuoteEvent>>,
    pub sessions: Vec<Session>,
    pub truth: GroundTruth,
    pub sector_table: SectorTable,
    factors: Vec<FactorPath>,
}

/// Maps absolute seconds to trading seconds (session gaps removed).
struct TradingClock {
    sessions: Vec<Session>,
    offsets: Vec<f64>,
}

impl TradingClock {
    fn new(sessions: &[Session]) -> Self {
        let mut offsets = Vec::with_capacity(sessions.len());
        let mut acc = 0.0;
        for s in sessions {
            offsets.push(acc);
            acc += s.len();
        }
        Self { sessions: sessions.to_vec(), offsets }
    }

    fn total(&self) -> f64 {
        self.offsets.last().copied().unwrap_or(0.0) + self.sessions.last().map_or(0.0, Session::len)
    }

    fn to_trading(&self, session: usize, t: f64) -> f64 {
        self.offsets[session] + (t - self.sessions[session].start)
    }
}

#[derive(Debug, Clone)]
struct FactorPath {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl FactorPath {
    fn at(&self, u: f64) -> f64 {
        let idx = ((u - self.start) / self.step).floor();
        let idx = (idx.max(0.0) as usize).min(self.values.len() - 1);
        self.values[idx]
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

const FACTOR_STREAMS: u64 = 1 << 32;

/// Draw one realisation of `scenario`.
pub fn generate(scenario: &MarketScenario) -> Result<SyntheticMarket> {
    scenario.validate()?;
    let sessions = scenario.session_layout()?;
    let clock = TradingClock::new(&sessions);
    let max_lag = scenario.assets.iter().flat_map(|a| &a.loadings).map(|l| l.lag).fold(0.0, f64::max);
    let start = -max_lag - scenario.grid;
    let points = ((clock.total() - start) / scenario.grid).ceil() as usize + 2;
    let sd = scenario.grid.sqrt();

    let factors: Vec<FactorPath> = (0..scenario.factors)
        .into_par_iter()
        .map(|f| {
            let mut rng = stream(scenario.seed, f as u64);
            let mut values = Vec::with_capacity(points);
            let mut b = 0.0;
            for _ in 0..points {
                values.push(b);
                let z: f64 = StandardNormal.sample(&mut rng);
                b += sd * z;
            }
            FactorPath { start, step: scenario.grid, values }
        })
        .collect();

    let quantum = i64::from(scenario.quantum);
    let per_asset: Vec<Vec<QuoteEvent>> = scenario
        .assets
        .par_iter()
        .enumerate()
        .map(|(i, asset)| {
            let mut rng = stream(scenario.seed, FACTOR_STREAMS + i as u64);
            let gaps = Exp::new(asset.intensity).expect("intensity validated positive");
            let mut events = Vec::new();
            let mut w = 0.0;
            let mut last_u = 0.0;
            let ln_p0 = asset.p0.ln();
            for (k, s) in sessions.iter().enumerate() {
                let mut t = s.start;
                loop {
                    t += gaps.sample(&mut rng);
                    if t >= s.end {
                        break;
                    }
                    let u = clock.to_trading(k, t);
                    let z: f64 = rng.sample(StandardNormal);
                    w += (u - last_u).sqrt() * z;
                    last_u = u;
                    let latent: f64 =
                        asset.loadings.iter().map(|l| l.beta * factors[l.factor].at(u - l.lag)).sum::<f64>()
                            + asset.eta * w;
                    let mid = (ln_p0 + scenario.price_scale * latent).exp();
                    let stamp = (t as i64).div_euclid(quantum) * quantum;
                    let seq = match events.last() {
                        Some(QuoteEvent { time, seq, .. }) if *time == stamp => seq + 1,
                        _ => 0,
                    };
                    events.push(QuoteEvent {
                        time: stamp,
                        seq,
                        best_bid: mid * (1.0 - scenario.half_spread),
                        best_ask: mid * (1.0 + scenario.half_spread),
                    });
                }
            }
            events
        })
        .collect();

    let truth = GroundTruth {
        seed: scenario.seed,
        factors: scenario.factors,
        sessions: scenario.sessions.clone(),
        days: scenario.days,
        assets: scenario.assets.clone(),
        events: per_asset.iter().map(Vec::len).collect(),
    };
    let quotes = scenario.assets.iter().map(|a| a.id.clone()).zip(per_asset).collect();
    Ok(SyntheticMarket { quotes, sessions, truth, sector_table: scenario.sector_table(), factors })
}

impl SyntheticMarket {
    /// The quotes as if read back from a file with origin 0.
    pub fn parsed(&self) -> ParsedQuotes {
        let mut assets = self.quotes.clone();
        assets.retain(|_, v| !v.is_empty());
        ParsedQuotes { rows: self.event_count(), assets, ..Default::default() }
    }

    /// Latent factor `f` at trading time `u` (seconds since the first
    /// session opened, gaps removed).
    pub fn factor_at(&self, f: usize, u: f64) -> f64 {
        self.factors[f].at(u)
    }

    pub fn event_count(&self) -> usize {
        self.quotes.values().map(Vec::len).sum()
    }

    /// Spliced seconds-axis series in scenario asset order. Assets whose
    /// price never moves are dropped.
    pub fn series(&self) -> Result<Vec<TickSeries>> {
        let (series, _) = ingest::series_from_quotes(&self.parsed(), &self.sessions, true, 2)?;
        let order: BTreeMap<&str, usize> =
            self.truth.assets.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
        let mut series = series;
        series.sort_by_key(|s| order[s.asset_id()]);
        Ok(series)
    }

    /// Quote file in the ingest format: `day,timestamp,ticker,bid,ask` with
    /// `HH:MM:SS` clock times, rows ordered by time then ticker.
    pub fn quotes_csv(&self) -> String {
        let mut rows: Vec<(i64, &str, u32, &QuoteEvent)> =
            self.quotes.iter().flat_map(|(id, evs)| evs.iter().map(move |e| (e.time, id.as_str(), e.seq, e))).collect();
        rows.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        let mut out = String::with_capacity(rows.len() * 48);
        out.push_str("day,timestamp,ticker,bid,ask\n");
        for (t, id, _, e) in rows {
            let (day, sec) = (t.div_euclid(86_400), t.rem_euclid(86_400));
            let _ = writeln!(
                out,
                "d{day:04},{:02}:{:02}:{:02},{id},{},{}",
                sec / 3600,
                sec / 60 % 60,
                sec % 60,
                e.best_bid,
                e.best_ask
            );
        }
        out
    }

    pub fn truth_json(&self) -> String {
        serde_json::to_string_pretty(&self.truth).expect("ground truth serialises") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_quotes, ParseOptions};

    fn small() -> MarketScenario {
        MarketScenario::one_factor(&[1.0, 1.0], &[0.0, 30.0], &[0.0, 0.2], &[0.5, 2.0], "0-2000", 11)
    }

    #[test]
    fn same_seed_same_output() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.quotes_csv(), b.quotes_csv());
        let mut other = small();
        other.seed = 12;
        assert_ne!(generate(&other).unwrap().quotes_csv(), a.quotes_csv());
    }

    #[test]
    fn intensities_and_quantisation() {
        let m = generate(&small()).unwrap();
        let n0 = m.quotes["S000"].len() as f64;
        let n1 = m.quotes["S001"].len() as f64;
        assert!((n0 - 1000.0).abs() < 5.0 * 1000f64.sqrt());
        assert!((n1 - 4000.0).abs() < 5.0 * 4000f64.sqrt());
        for evs in m.quotes.values() {
            assert!(evs.iter().all(|e| (0..2000).contains(&e.time) && e.best_ask >= e.best_bid));
            assert!(evs.windows(2).all(|w| (w[0].time, w[0].seq) < (w[1].time, w[1].seq)));
        }
    }

    #[test]
    fn csv_round_trips_through_the_parser() {
        let m = generate(&small()).unwrap();
        let opts = ParseOptions { origin: Some(0), ..ParseOptions::new() };
        let q = parse_quotes(m.quotes_csv().as_bytes(), &opts).unwrap();
        assert_eq!(q.assets, m.parsed().assets);
    }

    #[test]
    fn toml_scenarios() {
        let text = r#"
            seed = 3
            sessions = "0-1000"
            [sector_block]
            intra_lag = 0.0
            sectors = [{ name = "A", size = 2 }, { name = "B", size = 3, lag = 60.0 }]
        "#;
        let s = MarketScenario::from_toml(text).unwrap();
        assert_eq!(s.assets.len(), 5);
        assert_eq!(s.factors, 3);
        assert_eq!(s.assets[2].id, "B00");
        assert_eq!(s.assets[2].loadings[1], Loading { factor: 2, beta: 1.0, lag: 60.0 });
        assert_eq!(s.sector_table().sector_of("A01"), Some("A"));

        let bad = "sessions = \"0-1000\"\n[[assets]]\nid = \"X\"\nintensity = 0.0\n";
        assert!(MarketScenario::from_toml(bad).is_err());
        let zero = "sessions = \"10-10\"\n[[assets]]\nid = \"X\"\nintensity = 1.0\n";
        assert!(MarketScenario::from_toml(zero).is_err());
    }

    #[test]
    fn single_sector_is_one_factor() {
        let s = sector_block_scenario(&SectorBlock::new(&[("A", 3, 0.0)]), "0-100", 1);
        assert_eq!(s.factors, 1);
        assert!(s.assets.iter().all(|a| a.loadings.len() == 1));
    }
}
