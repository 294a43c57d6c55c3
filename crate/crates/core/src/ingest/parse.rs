//! Delimited quote-file parsing.

use std::collections::BTreeMap;
use std::io::Read;

use csv::StringRecord;

use crate::error::{Error, Result};

/// One best-bid/best-ask update for a single asset.
///
/// `time` is whole seconds relative to the parse origin; `seq` orders quotes
/// sharing the same second, in file order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteEvent {
    pub time: i64,
    pub seq: u32,
    pub best_bid: f64,
    pub best_ask: f64,
}

impl QuoteEvent {
    pub fn mid(&self) -> f64 {
        0.5 * (self.best_bid + self.best_ask)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimestampFormat {
    /// `HH:MM:SS` or plain integer seconds, decided per field.
    #[default]
    Auto,
    Clock,
    Epoch,
}

/// Column positions of a quote file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub delimiter: u8,
    pub timestamp: usize,
    pub ticker: usize,
    pub bid: usize,
    pub ask: usize,
    pub date: Option<usize>,
    pub timestamp_format: TimestampFormat,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            delimiter: b',',
            timestamp: 0,
            ticker: 1,
            bid: 2,
            ask: 3,
            date: None,
            timestamp_format: TimestampFormat::Auto,
        }
    }
}

impl ColumnSchema {
    /// Build a schema from header fields. Recognised names (case-insensitive):
    /// `timestamp|time|ts`, `ticker|symbol|asset`, `bid|best_bid`,
    /// `ask|best_ask`, `date|day`.
    pub fn from_header<'a>(names: impl IntoIterator<Item = &'a str>, delimiter: u8) -> Option<Self> {
        let mut schema = ColumnSchema { delimiter, date: None, ..Default::default() };
        let mut found = [false; 4];
        for (i, name) in names.into_iter().enumerate() {
            match name.trim().to_ascii_lowercase().as_str() {
                "timestamp" | "time" | "ts" => {
                    schema.timestamp = i;
                    found[0] = true;
                }
                "ticker" | "symbol" | "asset" => {
                    schema.ticker = i;
                    found[1] = true;
                }
                "bid" | "best_bid" => {
                    schema.bid = i;
                    found[2] = true;
                }
                "ask" | "best_ask" => {
                    schema.ask = i;
                    found[3] = true;
                }
                "date" | "day" => schema.date = Some(i),
                _ => {}
            }
        }
        found.iter().all(|&f| f).then_some(schema)
    }

    fn width(&self) -> usize {
        [self.timestamp, self.ticker, self.bid, self.ask].into_iter().chain(self.date).max().unwrap_or(0) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OnMalformed {
    #[default]
    Skip,
    Abort,
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub schema: ColumnSchema,
    /// Treat a first line whose fields name the columns as a header.
    pub detect_header: bool,
    pub on_malformed: OnMalformed,
    /// Seconds subtracted from every absolute timestamp. `None` uses the
    /// first valid row's timestamp.
    pub origin: Option<i64>,
}

impl ParseOptions {
    pub fn new() -> Self {
        Self { detect_header: true, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedQuotes {
    pub assets: BTreeMap<String, Vec<QuoteEvent>>,
    /// Absolute second that maps to `time == 0`.
    pub origin: i64,
    pub rows: usize,
    pub crossed: usize,
    pub malformed: Vec<RowError>,
}

impl ParsedQuotes {
    pub fn event_count(&self) -> usize {
        self.assets.values().map(Vec::len).sum()
    }
}

/// Parse `HH:MM:SS` (hours may exceed 23) into seconds.
pub fn parse_clock(s: &str) -> Option<i64> {
    let mut parts = s.split(':');
    let h: i64 = parts.next()?.trim().parse().ok()?;
    let m: i64 = parts.next()?.trim().parse().ok()?;
    let sec: i64 = match parts.next() {
        Some(p) => p.trim().parse().ok()?,
        None => 0,
    };
    if parts.next().is_some() || h < 0 || !(0..60).contains(&m) || !(0..60).contains(&sec) {
        return None;
    }
    Some(h * 3600 + m * 60 + sec)
}

fn parse_timestamp(s: &str, format: TimestampFormat) -> Option<i64> {
    let s = s.trim();
    match format {
        TimestampFormat::Clock => parse_clock(s),
        TimestampFormat::Epoch => s.parse().ok(),
        TimestampFormat::Auto => {
            if s.contains(':') {
                parse_clock(s)
            } else {
                s.parse().ok()
            }
        }
    }
}

fn parse_price(s: &str, what: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("unparsable {what} {s:?}"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("{what} must be positive and finite, got {v}"));
    }
    Ok(v)
}

struct Row {
    ticker: String,
    day: Option<String>,
    time: i64,
    bid: f64,
    ask: f64,
}

fn parse_row(fields: &StringRecord, schema: &ColumnSchema) -> std::result::Result<Row, String> {
    if fields.len() < schema.width() {
        return Err(format!("expected at least {} fields, found {}", schema.width(), fields.len()));
    }
    let ticker = &fields[schema.ticker];
    if ticker.is_empty() {
        return Err("empty ticker".into());
    }
    let ts = &fields[schema.timestamp];
    let time = parse_timestamp(ts, schema.timestamp_format).ok_or_else(|| format!("unparsable timestamp {ts:?}"))?;
    Ok(Row {
        ticker: ticker.to_string(),
        day: schema.date.map(|d| fields[d].to_string()),
        time,
        bid: parse_price(&fields[schema.bid], "bid")?,
        ask: parse_price(&fields[schema.ask], "ask")?,
    })
}

/// Reader for delimited text: no fixed header, ragged rows allowed, fields
/// trimmed, `#` lines ignored.
pub(crate) fn delimited_reader<R: Read>(reader: R, delimiter: u8) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

/// Next record, or a row error carrying its line number. `Ok(None)` at end
/// of input.
pub(crate) fn next_record<R: Read>(
    reader: &mut csv::Reader<R>,
    record: &mut StringRecord,
) -> Result<Option<std::result::Result<usize, RowError>>> {
    match reader.read_record(record) {
        Ok(false) => Ok(None),
        Ok(true) => Ok(Some(Ok(record.position().map_or(0, |p| p.line() as usize)))),
        Err(e) => match e.kind() {
            csv::ErrorKind::Utf8 { pos, err } => Ok(Some(Err(RowError {
                line: pos.as_ref().map_or(0, |p| p.line() as usize),
                message: format!("invalid UTF-8 in field {}", err.field() + 1),
            }))),
            _ => Err(Error::Format(format!("delimited input: {e}"))),
        },
    }
}

/// Parse a quote stream into per-asset event lists.
///
/// Rows for one ticker must arrive in exchange order; quotes sharing a second
/// get increasing `seq` values. Crossed quotes (ask < bid) are rejected and
/// counted; locked quotes (ask == bid) are kept. With a date column, dates are
/// ranked lexicographically and each day adds 86 400 s to the clock time.
pub fn parse_quotes<R: Read>(reader: R, opts: &ParseOptions) -> Result<ParsedQuotes> {
    let mut schema = opts.schema.clone();
    let mut rows = Vec::new();
    let mut out = ParsedQuotes::default();
    let mut first_content = true;
    let mut reader = delimited_reader(reader, schema.delimiter);
    let mut record = StringRecord::new();

    while let Some(next) = next_record(&mut reader, &mut record)? {
        let parsed = next.and_then(|line_no| {
            if first_content {
                first_content = false;
                if opts.detect_header {
                    if let Some(s) = ColumnSchema::from_header(record.iter(), schema.delimiter) {
                        schema = ColumnSchema { timestamp_format: schema.timestamp_format, ..s };
                        return Ok(None);
                    }
                }
            }
            parse_row(&record, &schema)
                .map(|r| Some((line_no, r)))
                .map_err(|message| RowError { line: line_no, message })
        });
        let row = match parsed {
            Ok(None) => continue,
            Ok(Some(row)) => Ok(row),
            Err(e) => Err(e),
        };
        out.rows += 1;
        match row {
            Ok((line_no, row)) if row.ask < row.bid => {
                out.crossed += 1;
                log::debug!("line {line_no}: crossed quote rejected");
            }
            Ok(row) => rows.push(row),
            Err(e) => {
                if opts.on_malformed == OnMalformed::Abort {
                    return Err(Error::MalformedRow { line: e.line, message: e.message });
                }
                out.malformed.push(e);
            }
        }
    }

    let day_rank: BTreeMap<&str, i64> = {
        let mut days: Vec<&str> = rows.iter().filter_map(|(_, r)| r.day.as_deref()).collect();
        days.sort_unstable();
        days.dedup();
        days.into_iter().enumerate().map(|(i, d)| (d, i as i64)).collect()
    };
    let absolute = |r: &Row| r.time + r.day.as_deref().map_or(0, |d| day_rank[d] * 86_400);

    out.origin = match (opts.origin, rows.first()) {
        (Some(o), _) => o,
        (None, Some((_, r))) => absolute(r),
        (None, None) => 0,
    };

    for (line_no, row) in &rows {
        let time = absolute(row) - out.origin;
        let events = out.assets.entry(row.ticker.clone()).or_default();
        let seq = match events.last() {
            Some(last) if last.time == time => last.seq + 1,
            Some(last) if last.time > time => {
                let message = format!("{}: timestamp goes backwards", row.ticker);
                if opts.on_malformed == OnMalformed::Abort {
                    return Err(Error::MalformedRow { line: *line_no, message });
                }
                out.malformed.push(RowError { line: *line_no, message });
                continue;
            }
            _ => 0,
        };
        events.push(QuoteEvent { time, seq, best_bid: row.bid, best_ask: row.ask });
    }
    out.assets.retain(|_, v| !v.is_empty());
    Ok(out)
}
