//! Quote parsing and construction of per-asset log-price step functions.

mod parse;
mod sectors;
mod series;

pub use parse::{
    parse_clock, parse_quotes, ColumnSchema, OnMalformed, ParseOptions, ParsedQuotes, QuoteEvent, RowError,
    TimestampFormat,
};
pub use sectors::{SectorInfo, SectorTable};
pub use series::{
    build_tick_series, collapse_unchanged, rescale_to_circle, splice_sessions, split_by_session, validate_sessions,
    Session, Spliced, TickSeries, TimeAxis,
};

use crate::error::{Error, Result};

/// Parse a session list such as `"09:00-11:30,12:30-15:00"` into clock
/// seconds. Plain integers are accepted as seconds.
pub fn parse_sessions(spec: &str) -> Result<Vec<Session>> {
    let parse_point = |s: &str| -> Result<f64> {
        let s = s.trim();
        let v = if s.contains(':') { parse_clock(s) } else { s.parse().ok() };
        v.map(|v| v as f64).ok_or_else(|| Error::Config(format!("bad session time {s:?}")))
    };
    let sessions = spec
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|part| {
            let (a, b) =
                part.split_once('-').ok_or_else(|| Error::Config(format!("session {part:?} is not START-END")))?;
            Ok(Session::new(parse_point(a)?, parse_point(b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_sessions(&sessions)?;
    Ok(sessions)
}

/// Sessions repeated for each of `days` consecutive days and shifted so that
/// `origin` (absolute seconds) maps to zero.
pub fn daily_sessions(clock: &[Session], days: usize, origin: i64) -> Vec<Session> {
    (0..days as i64)
        .flat_map(|d| {
            clock.iter().map(move |s| {
                let base = (d * 86_400 - origin) as f64;
                Session::new(s.start + base, s.end + base)
            })
        })
        .collect()
}

/// Counters gathered while turning quotes into series.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IngestStats {
    pub rows: usize,
    pub malformed: usize,
    pub crossed: usize,
    pub events: usize,
    pub retained_events: usize,
    pub dropped_outside_sessions: usize,
    pub excluded_assets: Vec<String>,
}

/// A spliced series and its dropped-event count, or `None` when excluded.
type Built = Option<(TickSeries, usize)>;

/// Run build → splice for every asset against a common session layout,
/// returning spliced seconds-axis series. Assets with fewer than
/// `min_events` retained events (or with no price change at all) are
/// excluded and listed in the stats.
pub fn series_from_quotes(
    quotes: &ParsedQuotes,
    sessions: &[Session],
    strict: bool,
    min_events: usize,
) -> Result<(Vec<TickSeries>, IngestStats)> {
    use rayon::prelude::*;

    let mut stats = IngestStats {
        rows: quotes.rows,
        malformed: quotes.malformed.len(),
        crossed: quotes.crossed,
        events: quotes.event_count(),
        ..Default::default()
    };
    let built: Vec<(String, Result<Built>)> = quotes
        .assets
        .par_iter()
        .map(|(asset, events)| {
            let r = (|| {
                let series = match build_tick_series(asset, events) {
                    Ok(s) => s,
                    Err(Error::DegenerateSeries { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let spliced = match splice_sessions(&series, sessions, strict) {
                    Ok(s) => s,
                    Err(Error::NoEvents { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                };
                Ok(Some((spliced.series, spliced.dropped)))
            })();
            (asset.clone(), r)
        })
        .collect();

    let mut out = Vec::with_capacity(built.len());
    for (asset, r) in built {
        match r? {
            Some((s, dropped)) if s.len() >= min_events.max(2) => {
                stats.dropped_outside_sessions += dropped;
                stats.retained_events += s.len();
                out.push(s);
            }
            Some((_, dropped)) => {
                stats.dropped_outside_sessions += dropped;
                stats.excluded_assets.push(asset);
            }
            None => stats.excluded_assets.push(asset),
        }
    }
    Ok((out, stats))
}

/// A single session spanning every event in `quotes`.
pub fn covering_session(quotes: &ParsedQuotes) -> Option<Session> {
    let lo = quotes.assets.values().filter_map(|v| v.first()).map(|e| e.time).min()?;
    let hi = quotes.assets.values().filter_map(|v| v.last()).map(|e| e.time).max()?;
    Some(Session::new(lo as f64, (hi + 1) as f64))
}
