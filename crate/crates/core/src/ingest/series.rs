//! Log mid-price step functions and their time-axis transforms.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::parse::QuoteEvent;
use crate::error::{Error, Result};

/// Which clock a [`TickSeries`] is expressed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeAxis {
    /// Seconds (possibly spliced trading time).
    Seconds,
    /// Rescaled onto `[0, 2π]`.
    Circle,
}

/// A trading session `[start, end)` in original seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub start: f64,
    pub end: f64,
}

impl Session {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// One asset's log mid-price as a right-continuous step function.
///
/// Times strictly increase and consecutive prices always differ. On the
/// circle axis the first event sits at `t = 0` and every time is in `[0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    asset_id: String,
    times: Vec<f64>,
    log_prices: Vec<f64>,
    t_span: f64,
    sessions: Vec<Session>,
    axis: TimeAxis,
}

impl TickSeries {
    /// Assemble a series from raw parts, checking every invariant.
    pub fn from_parts(
        asset_id: impl Into<String>,
        times: Vec<f64>,
        log_prices: Vec<f64>,
        t_span: f64,
        sessions: Vec<Session>,
        axis: TimeAxis,
    ) -> Result<Self> {
        let s = Self { asset_id: asset_id.into(), times, log_prices, t_span, sessions, axis };
        s.validate()?;
        Ok(s)
    }

    fn invariant(&self, message: impl Into<String>) -> Error {
        Error::SeriesInvariant { asset: self.asset_id.clone(), message: message.into() }
    }

    fn validate(&self) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::NoEvents { asset: self.asset_id.clone() });
        }
        if self.times.len() != self.log_prices.len() {
            return Err(self.invariant("times and prices differ in length"));
        }
        if !self.t_span.is_finite() || self.t_span < 0.0 {
            return Err(self.invariant(format!("bad duration {}", self.t_span)));
        }
        if let Some(i) = self.log_prices.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("{} log price at event {i}", self.asset_id)));
        }
        if let Some(i) = self.times.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(format!("{} time at event {i}", self.asset_id)));
        }
        for (i, w) in self.times.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(self.invariant(format!("times not strictly increasing at event {}", i + 1)));
            }
        }
        for (i, w) in self.log_prices.windows(2).enumerate() {
            if w[1] == w[0] {
                return Err(self.invariant(format!("unchanged price at event {}", i + 1)));
            }
        }
        if self.axis == TimeAxis::Circle {
            if self.times[0] != 0.0 {
                return Err(self.invariant("first rescaled time must be 0"));
            }
            if *self.times.last().unwrap() > TAU {
                return Err(self.invariant("rescaled time exceeds 2π"));
            }
        }
        Ok(())
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn log_prices(&self) -> &[f64] {
        &self.log_prices
    }

    /// Duration `T` in seconds of the interval the series lives on.
    pub fn t_span(&self) -> f64 {
        self.t_span
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn axis(&self) -> TimeAxis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(t_m, p_m - p_{m-1})` for every event after the first.
    pub fn increments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times[1..].iter().zip(self.log_prices.windows(2)).map(|(&t, w)| (t, w[1] - w[0]))
    }

    pub fn with_asset_id(mut self, asset_id: impl Into<String>) -> Self {
        self.asset_id = asset_id.into();
        self
    }
}

fn collapse(times: Vec<f64>, prices: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut t_out = Vec::with_capacity(times.len());
    let mut p_out: Vec<f64> = Vec::with_capacity(prices.len());
    for (t, p) in times.into_iter().zip(prices) {
        if p_out.last() != Some(&p) {
            t_out.push(t);
            p_out.push(p);
        }
    }
    (t_out, p_out)
}

/// Drop events whose log price repeats the previous one.
pub fn collapse_unchanged(series: &TickSeries) -> TickSeries {
    let (times, log_prices) = collapse(series.times.clone(), series.log_prices.clone());
    TickSeries { times, log_prices, ..series.clone() }
}

/// Build the log mid-price step function of one asset.
///
/// Quotes sharing a second are spread over that second at offsets
/// `rank / (count + 1)` so every event keeps a distinct time. Quotes that
/// leave the mid price unchanged are dropped, keeping the first occurrence.
pub fn build_tick_series(asset_id: &str, events: &[QuoteEvent]) -> Result<TickSeries> {
    match events.len() {
        0 => return Err(Error::NoEvents { asset: asset_id.to_string() }),
        1 => return Err(Error::DegenerateSeries { asset: asset_id.to_string() }),
        _ => {}
    }
    let mut times = Vec::with_capacity(events.len());
    let mut mids = Vec::with_capacity(events.len());
    let mut start = 0;
    while start < events.len() {
        let second = events[start].time;
        let end = start + events[start..].iter().take_while(|e| e.time == second).count();
        let width = (end - start + 1) as f64;
        for (rank, e) in events[start..end].iter().enumerate() {
            if !(e.best_bid > 0.0 && e.best_ask > 0.0) {
                return Err(Error::SeriesInvariant {
                    asset: asset_id.to_string(),
                    message: format!("non-positive price at t={}", e.time),
                });
            }
            times.push(second as f64 + rank as f64 / width);
            mids.push(e.mid());
        }
        start = end;
    }
    let (times, mids) = collapse(times, mids);
    let log_prices = mids.into_iter().map(f64::ln).collect();
    let t_span = (events.last().unwrap().time + 1) as f64;
    TickSeries::from_parts(asset_id, times, log_prices, t_span.max(0.0), Vec::new(), TimeAxis::Seconds)
}

/// Result of [`splice_sessions`].
#[derive(Debug, Clone)]
pub struct Spliced {
    pub series: TickSeries,
    /// Events that fell outside every session.
    pub dropped: usize,
}

/// Check that sessions are non-empty, ordered and disjoint.
pub fn validate_sessions(sessions: &[Session]) -> Result<()> {
    if sessions.is_empty() {
        return Err(Error::Config("at least one session is required".into()));
    }
    for s in sessions {
        if !(s.start.is_finite() && s.end.is_finite()) || s.is_empty() {
            return Err(Error::Config(format!("empty session [{}, {})", s.start, s.end)));
        }
    }
    for w in sessions.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::Config(format!(
                "sessions overlap or are unordered: [{}, {}) then [{}, {})",
                w[0].start, w[0].end, w[1].start, w[1].end
            )));
        }
    }
    Ok(())
}

/// Concatenate in-session trading time, deleting the gaps between sessions.
///
/// An event at original time `t` in session `s` lands at
/// `t - s.start + Σ(len of earlier sessions)`. Events outside every session
/// are dropped (or rejected when `strict`).
pub fn splice_sessions(series: &TickSeries, sessions: &[Session], strict: bool) -> Result<Spliced> {
    validate_sessions(sessions)?;
    if series.axis != TimeAxis::Seconds {
        return Err(series.invariant("splicing needs a series on the seconds axis"));
    }
    let mut offsets = Vec::with_capacity(sessions.len());
    let mut total = 0.0;
    for s in sessions {
        offsets.push(total);
        total += s.len();
    }
    let mut times = Vec::with_capacity(series.len());
    let mut prices = Vec::with_capacity(series.len());
    let mut dropped = 0;
    let mut cursor = 0;
    for (&t, &p) in series.times.iter().zip(&series.log_prices) {
        while cursor < sessions.len() && sessions[cursor].end <= t {
            cursor += 1;
        }
        match sessions.get(cursor).filter(|s| s.contains(t)) {
            Some(s) => {
                times.push(offsets[cursor] + (t - s.start));
                prices.push(p);
            }
            None if strict => {
                return Err(Error::OutsideSessions { asset: series.asset_id.clone(), time: t });
            }
            None => dropped += 1,
        }
    }
    let (times, log_prices) = collapse(times, prices);
    let series = TickSeries::from_parts(
        series.asset_id.clone(),
        times,
        log_prices,
        total,
        sessions.to_vec(),
        TimeAxis::Seconds,
    )?;
    Ok(Spliced { series, dropped })
}

/// Map spliced seconds onto `[0, 2π]` via `t ↦ 2π·t/T`, pinning the first
/// event to `t = 0` (the opening price is the first observed quote).
pub fn rescale_to_circle(series: &TickSeries) -> Result<TickSeries> {
    if series.axis != TimeAxis::Seconds {
        return Err(series.invariant("series is already rescaled"));
    }
    let t_span = series.t_span;
    if t_span <= 0.0 {
        return Err(Error::ZeroDuration);
    }
    if series.times[0] < 0.0 || *series.times.last().unwrap() > t_span {
        return Err(series.invariant(format!("events outside [0, {t_span}]")));
    }
    let scale = TAU / t_span;
    let mut times: Vec<f64> = series.times.iter().map(|&t| (t * scale).min(TAU)).collect();
    times[0] = 0.0;
    TickSeries::from_parts(
        series.asset_id.clone(),
        times,
        series.log_prices.clone(),
        t_span,
        series.sessions.clone(),
        TimeAxis::Circle,
    )
}

/// Cut a spliced seconds-axis series into one series per session, each on
/// its own local clock starting at 0. Sessions with no events are skipped.
pub fn split_by_session(series: &TickSeries) -> Result<Vec<TickSeries>> {
    if series.axis != TimeAxis::Seconds || series.sessions.is_empty() {
        return Err(series.invariant("per-session split needs a spliced seconds-axis series"));
    }
    let mut out = Vec::with_capacity(series.sessions.len());
    let mut offset = 0.0;
    let mut last_price: Option<f64> = None;
    let mut i = 0;
    for s in &series.sessions {
        let end = offset + s.len();
        let mut times = Vec::new();
        let mut prices = Vec::new();
        // Carry the prevailing price into the session open.
        if let Some(p) = last_price {
            times.push(0.0);
            prices.push(p);
        }
        while i < series.len() && series.times[i] < end {
            times.push(series.times[i] - offset);
            prices.push(series.log_prices[i]);
            i += 1;
        }
        if let Some(&p) = prices.last() {
            last_price = Some(p);
        }
        if times.len() > 1 && times[1] == 0.0 {
            times.remove(0);
            prices.remove(0);
        }
        let (times, prices) = collapse(times, prices);
        if !times.is_empty() {
            out.push(TickSeries::from_parts(
                series.asset_id.clone(),
                times,
                prices,
                s.len(),
                vec![*s],
                TimeAxis::Seconds,
            )?);
        }
        offset = end;
    }
    Ok(out)
}
