//! CSV ingestion and output.
//!
//! Input files carry a date column (ISO `2014-06-12` or `12.06.2014`) and a numeric
//! column; a header row is optional and detected from whether the first date parses.
//! Output always uses ISO dates.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{LpplError, Result};
use crate::series::{PriceSeries, TradingCalendar};

const DATE_FORMATS: [&str; 2] = ["%Y-%m-%d", "%d.%m.%Y"];

pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    DATE_FORMATS
        .iter()
        .find_map(|f| NaiveDate::parse_from_str(text, f).ok())
}

/// Column selector: zero-based position, or header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl Column {
    /// Digits select by position, anything else by header name.
    pub fn parse(text: &str) -> Self {
        text.parse()
            .map(Column::Index)
            .unwrap_or_else(|_| Column::Name(text.to_string()))
    }

    fn resolve(&self, header: Option<&csv::StringRecord>, source: &str) -> Result<usize> {
        match self {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => header
                .and_then(|h| h.iter().position(|f| f.trim() == name))
                .ok_or_else(|| LpplError::Parse {
                    source_name: source.to_string(),
                    line: 1,
                    message: format!("no column named {name:?}"),
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub date: Column,
    pub value: Column,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            date: Column::Index(0),
            value: Column::Index(1),
        }
    }
}

/// Reads a price series from CSV text. `source` names the input in error messages and
/// is the fallback label when there is no header.
pub fn read_csv<R: Read>(reader: R, source: &str, columns: &ColumnSpec) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut records = rdr.records().peekable();

    let header = match records.peek() {
        Some(Ok(first)) => {
            let date_idx = match &columns.date {
                Column::Index(i) => Some(*i),
                Column::Name(_) => None,
            };
            let looks_like_data = date_idx
                .and_then(|i| first.get(i))
                .and_then(parse_date)
                .is_some();
            if looks_like_data {
                None
            } else {
                records.next().transpose()?
            }
        }
        Some(Err(_)) => records.next().transpose()?,
        None => None,
    };
    let date_col = columns.date.resolve(header.as_ref(), source)?;
    let value_col = columns.value.resolve(header.as_ref(), source)?;
    let label = header
        .as_ref()
        .and_then(|h| h.get(value_col))
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .unwrap_or_else(|| source.to_string());

    let mut rows: Vec<(NaiveDate, f64, u64)> = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| LpplError::Parse {
            source_name: source.to_string(),
            line,
            message,
        };
        if record.iter().all(str::is_empty) {
            continue;
        }
        let date_text = record
            .get(date_col)
            .ok_or_else(|| err(format!("missing date column {date_col}")))?;
        let date =
            parse_date(date_text).ok_or_else(|| err(format!("unparseable date {date_text:?}")))?;
        let value_text = record
            .get(value_col)
            .ok_or_else(|| err(format!("missing value column {value_col}")))?;
        let value: f64 = value_text
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| err(format!("unparseable value {value_text:?}")))?;
        rows.push((date, value, line));
    }

    if rows.windows(2).any(|w| w[0].0 > w[1].0) {
        log::warn!("{source}: dates out of order, sorting");
        rows.sort_by_key(|r| r.0);
    }
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(LpplError::Parse {
            source_name: source.to_string(),
            line: w[1].2,
            message: format!("duplicate date {} (first seen on line {})", w[1].0, w[0].2),
        });
    }
    let (dates, values) = rows.into_iter().map(|(d, v, _)| (d, v)).unzip();
    PriceSeries::new(label, dates, values)
}

pub fn load_csv(path: impl AsRef<Path>, columns: &ColumnSpec) -> Result<PriceSeries> {
    let path = path.as_ref();
    let source = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("series")
        .to_string();
    let file = File::open(path).map_err(|e| {
        LpplError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    read_csv(BufReader::new(file), &source, columns)
}

/// Writes `date,<label>` rows. Values use the shortest representation that parses back
/// to the same `f64`.
pub fn write_csv_to<W: Write>(series: &PriceSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", series.label()])?;
    for (d, v) in series.dates().iter().zip(series.values()) {
        w.write_record([d.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(series: &PriceSeries, path: impl AsRef<Path>) -> Result<()> {
    write_csv_to(series, File::create(path)?)
}

/// Holiday list: one date per line, blank lines and `#` comments ignored.
pub fn load_holidays(path: impl AsRef<Path>) -> Result<TradingCalendar> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut holidays = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        holidays.push(parse_date(text).ok_or_else(|| LpplError::Parse {
            source_name: path.display().to_string(),
            line: i as u64 + 1,
            message: format!("unparseable date {text:?}"),
        })?);
    }
    Ok(TradingCalendar::with_holidays(holidays))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}
