//! Asset → (subsector, sector) metadata.

use std::collections::BTreeMap;
use std::io::Read;

use csv::StringRecord;

use crate::error::{Error, Result};
use crate::ingest::parse::{delimited_reader, next_record};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorInfo {
    pub subsector: String,
    pub sector: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SectorTable {
    entries: BTreeMap<String, SectorInfo>,
}

impl SectorTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a mapping; a ticker may appear only once.
    pub fn insert(&mut self, ticker: &str, subsector: &str, sector: &str) -> Result<()> {
        let info = SectorInfo { subsector: subsector.to_string(), sector: sector.to_string() };
        if self.entries.insert(ticker.to_string(), info).is_some() {
            return Err(Error::Format(format!("sector table: duplicate ticker {ticker}")));
        }
        Ok(())
    }

    pub fn get(&self, ticker: &str) -> Option<&SectorInfo> {
        self.entries.get(ticker)
    }

    pub fn sector_of(&self, ticker: &str) -> Option<&str> {
        self.get(ticker).map(|i| i.sector.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SectorInfo)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Tickers from `assets` that have no entry.
    pub fn missing<'a>(&self, assets: &'a [String]) -> Vec<&'a str> {
        assets.iter().filter(|a| !self.entries.contains_key(*a)).map(String::as_str).collect()
    }

    /// Parse `ticker,subsector,sector` rows; an optional header whose first
    /// field is `ticker` is skipped, as are `#` comments.
    pub fn parse<R: Read>(reader: R) -> Result<Self> {
        let mut table = SectorTable::new();
        let mut reader = delimited_reader(reader, b',');
        let mut record = StringRecord::new();
        while let Some(next) = next_record(&mut reader, &mut record)? {
            let line = next.map_err(|e| Error::MalformedRow { line: e.line, message: e.message })?;
            if record.get(0).is_some_and(|f| f.eq_ignore_ascii_case("ticker")) {
                continue;
            }
            if record.len() != 3 || record.iter().any(str::is_empty) {
                return Err(Error::MalformedRow { line, message: "expected ticker,subsector,sector".into() });
            }
            table.insert(&record[0], &record[1], &record[2])?;
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["ticker", "subsector", "sector"]).expect("in-memory write");
        for (t, i) in &self.entries {
            w.write_record([t, &i.subsector, &i.sector]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("fields are UTF-8")
    }
}
