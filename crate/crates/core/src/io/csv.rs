//! OHLC price files and the small two- and three-column outputs.
//!
//! Price files start with the exact header
//! `timestamp,open,high,low,close,volume`. Timestamps are epoch seconds or
//! ISO-8601 (`2009-06-01`, `2009-06-01T00:00:00`, RFC 3339 with offset).
//! `volume` may be empty. Error messages carry the 1-based file line.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};
use crate::fit::Forecast;
use crate::series::PriceSeries;

pub const HEADER: [&str; 6] = ["timestamp", "open", "high", "low", "close", "volume"];

/// One bar of an OHLC file.
#[derive(Clone, Debug, PartialEq)]
pub struct OhlcRow {
    pub timestamp: f64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: Option<f64>,
}

pub fn load_csv(path: &Path, column: &str) -> Result<PriceSeries> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text, column)
}

/// Parses a price file and returns the named column (`open`, `high`, `low`,
/// `close` or `volume`) as a series.
pub fn parse_csv(text: &str, column: &str) -> Result<PriceSeries> {
    let col = HEADER[1..]
        .iter()
        .position(|c| *c == column)
        .map(|i| i + 1)
        .ok_or_else(|| Error::Parse(format!("unknown column {column:?} (expected open, high, low, close or volume)")))?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => return Err(Error::Schema("missing header row".into())),
    };
    check_header(&header)?;

    let (mut times, mut values) = (Vec::new(), Vec::new());
    let mut prev: Option<(f64, u64)> = None;
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = |msg: String| Error::Row { row: line as usize, msg };
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != HEADER.len() {
            return Err(row(format!("expected {} fields, found {}", HEADER.len(), rec.len())));
        }
        let t = parse_timestamp(rec[0].trim()).ok_or_else(|| row(format!("bad timestamp {:?}", &rec[0])))?;
        let mut fields = [f64::NAN; 6];
        for i in 1..HEADER.len() {
            let cell = rec[i].trim();
            if i == 5 && cell.is_empty() {
                continue;
            }
            fields[i] = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| row(format!("{} is not a number: {cell:?}", HEADER[i])))?;
        }
        if let Some((pt, pline)) = prev {
            if t <= pt {
                return Err(row(format!(
                    "timestamp {} does not increase on line {pline} ({pt})",
                    &rec[0]
                )));
            }
        }
        prev = Some((t, line));
        let v = fields[col];
        if v.is_nan() {
            return Err(row(format!("{column} is empty")));
        }
        if v <= 0.0 {
            return Err(row(format!("{column} must be positive, got {v}")));
        }
        times.push(t);
        values.push(v);
    }
    PriceSeries::new(times, values, column)
}

fn check_header(rec: &csv::StringRecord) -> Result<()> {
    for (i, want) in HEADER.iter().enumerate() {
        match rec.get(i).map(|c| c.trim_start_matches('\u{feff}')) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(Error::Schema(format!(
                    "header cell {} is {got:?}, expected {want:?}",
                    i + 1
                )))
            }
            None => return Err(Error::Schema(format!("header is missing cell {} ({want:?})", i + 1))),
        }
    }
    if rec.len() > HEADER.len() {
        return Err(Error::Schema(format!(
            "header cell {} is {:?}, expected end of header",
            HEADER.len() + 1,
            &rec[HEADER.len()]
        )));
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Row { row: p.line() as usize, msg: e.to_string() },
        None => Error::Parse(e.to_string()),
    }
}

/// Epoch seconds or an ISO-8601 date/time (naive values are UTC).
pub fn parse_timestamp(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(epoch(dt.naive_utc()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(epoch(dt));
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(epoch)
}

fn epoch(dt: NaiveDateTime) -> f64 {
    let utc = dt.and_utc();
    utc.timestamp() as f64 + f64::from(utc.timestamp_subsec_nanos()) * 1e-9
}

pub fn write_ohlc(rows: &[OhlcRow]) -> String {
    let mut out = HEADER.join(",");
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{},{},", r.timestamp, r.open, r.high, r.low, r.close);
        if let Some(v) = r.volume {
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Bars whose open is the previous close (`first_open` for the first bar).
pub fn bars_from_closes(times: &[f64], closes: &[f64], first_open: f64, volumes: Option<&[f64]>) -> Vec<OhlcRow> {
    let mut open = first_open;
    times
        .iter()
        .zip(closes)
        .enumerate()
        .map(|(i, (&timestamp, &close))| {
            let row = OhlcRow {
                timestamp,
                open,
                high: open.max(close),
                low: open.min(close),
                close,
                volume: volumes.map(|v| v[i]),
            };
            open = close;
            row
        })
        .collect()
}

/// Two-column `t,y` curve.
pub fn points_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("t,y\n");
    for (t, y) in points {
        let _ = writeln!(out, "{t},{y}");
    }
    out
}

/// `timestamp,value,is_forecast`: in-sample rows then forecast rows.
pub fn forecast_csv(fitted: &Forecast, ahead: &Forecast) -> String {
    let mut out = String::from("timestamp,value,is_forecast\n");
    for (flag, f) in [(false, fitted), (true, ahead)] {
        for (t, v) in f.timestamps.iter().zip(&f.values) {
            let _ = writeln!(out, "{t},{v},{flag}");
        }
    }
    out
}
