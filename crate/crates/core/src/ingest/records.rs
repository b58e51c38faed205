//! Parsing of raw token-transfer exports (CSV or JSON lines).

use std::io::{BufRead, BufReader, Read};

use chrono::{DateTime, NaiveDateTime, Utc};
use primitive_types::U256;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::Address;

/// One token transfer row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferRecord {
    pub token_address: Address,
    pub from_address: Address,
    pub to_address: Address,
    /// Base units (Wei scale).
    #[serde(with = "crate::util::u256_dec")]
    pub value: U256,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl InputFormat {
    /// Guess the format from a file extension; `.jsonl`/`.ndjson`/`.json` are JSON lines,
    /// everything else is CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "jsonl" || ext == "ndjson" || ext == "json" => InputFormat::Jsonl,
            _ => InputFormat::Csv,
        }
    }
}

/// What a parse error refers to.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RowErrorKind {
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("invalid address in {field}: {message}")]
    InvalidAddress { field: &'static str, message: String },
    #[error("invalid value {0:?}")]
    InvalidValue(String),
    #[error("invalid timestamp {0:?}")]
    InvalidTimestamp(String),
    #[error("malformed row: {0}")]
    Malformed(String),
}

/// A rejected input row. `line` is 1-based and counts the CSV header.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct RowError {
    pub line: u64,
    pub kind: RowErrorKind,
}

/// Field values before validation. Unknown columns are ignored.
#[derive(Debug, Default, Deserialize)]
struct RawRow {
    token_address: Option<String>,
    from_address: Option<String>,
    to_address: Option<String>,
    value: Option<RawValue>,
    block_timestamp: Option<RawValue>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Text(String),
    Unsigned(u64),
    Signed(i64),
    Float(f64),
}

impl RawValue {
    fn into_text(self) -> String {
        match self {
            RawValue::Text(s) => s,
            RawValue::Unsigned(v) => v.to_string(),
            RawValue::Signed(v) => v.to_string(),
            RawValue::Float(v) => v.to_string(),
        }
    }

    /// JSON numbers beyond 64 bits arrive as lossy floats, so only exact
    /// integers are accepted for amounts.
    fn into_value_text(self) -> Result<String, RowErrorKind> {
        match self {
            RawValue::Float(v) => Err(RowErrorKind::InvalidValue(format!(
                "{v} (not an exact integer; write large amounts as strings)"
            ))),
            other => Ok(other.into_text()),
        }
    }
}

fn field_address(raw: Option<String>, field: &'static str) -> Result<Address, RowErrorKind> {
    let text = raw.ok_or(RowErrorKind::MissingField(field))?;
    text.parse()
        .map_err(|e: crate::address::AddressError| RowErrorKind::InvalidAddress {
            field,
            message: e.to_string(),
        })
}

/// Parses a non-negative decimal integer (or `0x` hex) into 256 bits.
pub fn parse_value(text: &str) -> Result<U256, RowErrorKind> {
    let t = text.trim();
    let invalid = || RowErrorKind::InvalidValue(text.to_string());
    if t.is_empty() || t.starts_with('-') || t.starts_with('+') {
        return Err(invalid());
    }
    if let Some(hex) = t.strip_prefix("0x") {
        if hex.is_empty() || hex.len() > 64 {
            return Err(invalid());
        }
        return U256::from_str_radix(hex, 16).map_err(|_| invalid());
    }
    if !t.bytes().all(|b| b.is_ascii_digit()) {
        return Err(invalid());
    }
    U256::from_dec_str(t).map_err(|_| invalid())
}

/// Accepts `YYYY-MM-DD HH:MM:SS[.fff] UTC`, the same without suffix (taken as UTC),
/// RFC 3339 / ISO-8601 with offset, and bare unix seconds.
pub fn parse_timestamp(text: &str) -> Result<DateTime<Utc>, RowErrorKind> {
    let t = text.trim();
    let invalid = || RowErrorKind::InvalidTimestamp(text.to_string());
    if t.is_empty() {
        return Err(invalid());
    }
    if t.bytes().all(|b| b.is_ascii_digit()) {
        let secs: i64 = t.parse().map_err(|_| invalid())?;
        return DateTime::from_timestamp(secs, 0).ok_or_else(invalid);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        return Ok(dt.with_timezone(&Utc));
    }
    let body = t.strip_suffix(" UTC").or_else(|| t.strip_suffix('Z')).unwrap_or(t);
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(body, fmt) {
            return Ok(naive.and_utc());
        }
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%d %H:%M:%S%.f%z"] {
        if let Ok(dt) = DateTime::parse_from_str(t, fmt) {
            return Ok(dt.with_timezone(&Utc));
        }
    }
    Err(invalid())
}

impl TryFrom<RawRow> for TransferRecord {
    type Error = RowErrorKind;

    fn try_from(raw: RawRow) -> Result<Self, Self::Error> {
        let token_address = field_address(raw.token_address, "token_address")?;
        let from_address = field_address(raw.from_address, "from_address")?;
        let to_address = field_address(raw.to_address, "to_address")?;
        let value = parse_value(
            &raw.value
                .ok_or(RowErrorKind::MissingField("value"))?
                .into_value_text()?,
        )?;
        let timestamp = parse_timestamp(
            &raw.block_timestamp
                .ok_or(RowErrorKind::MissingField("block_timestamp"))?
                .into_text(),
        )?;
        Ok(TransferRecord {
            token_address,
            from_address,
            to_address,
            value,
            timestamp,
        })
    }
}

/// Streaming record iterator over a CSV or JSONL byte stream.
///
/// Yields one item per data row in input order. Errors carry the source
/// line number; the caller decides whether to abort or skip.
pub fn parse_transfers<'a, R: Read + 'a>(
    input: R,
    format: InputFormat,
) -> Box<dyn Iterator<Item = Result<TransferRecord, RowError>> + 'a> {
    match format {
        InputFormat::Csv => Box::new(CsvRecords::new(input)),
        InputFormat::Jsonl => Box::new(JsonlRecords::new(input)),
    }
}

const FIELDS: [&str; 5] = [
    "token_address",
    "from_address",
    "to_address",
    "value",
    "block_timestamp",
];

struct CsvRecords<R: Read> {
    reader: csv::Reader<R>,
    /// Column index of each of [`FIELDS`].
    columns: Option<Result<[Option<usize>; 5], String>>,
    row: csv::StringRecord,
    done: bool,
}

impl<R: Read> CsvRecords<R> {
    fn new(input: R) -> Self {
        let reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        CsvRecords {
            reader,
            columns: None,
            row: csv::StringRecord::new(),
            done: false,
        }
    }
}

impl<R: Read> Iterator for CsvRecords<R> {
    type Item = Result<TransferRecord, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let columns = match self.columns.get_or_insert_with(|| {
            self.reader
                .headers()
                .map(|h| FIELDS.map(|f| h.iter().position(|c| c.trim_start_matches('\u{feff}') == f)))
                .map_err(|e| e.to_string())
        }) {
            Ok(c) => *c,
            Err(message) => {
                self.done = true;
                return Some(Err(RowError {
                    line: 1,
                    kind: RowErrorKind::Malformed(format!("unreadable header: {message}")),
                }));
            }
        };
        match self.reader.read_record(&mut self.row) {
            Ok(false) => {
                self.done = true;
                None
            }
            Ok(true) => {
                let line = self.row.position().map(|p| p.line()).unwrap_or(0);
                let field = |i: usize| columns[i].and_then(|c| self.row.get(c)).filter(|v| !v.is_empty());
                let text = |i: usize| field(i).map(str::to_string);
                let raw = RawRow {
                    token_address: text(0),
                    from_address: text(1),
                    to_address: text(2),
                    value: text(3).map(RawValue::Text),
                    block_timestamp: text(4).map(RawValue::Text),
                };
                let parsed = TransferRecord::try_from(raw);
                Some(parsed.map_err(|kind| RowError { line, kind }))
            }
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                // Unequal field counts and bad UTF-8 are recoverable; IO errors are not.
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    self.done = true;
                }
                Some(Err(RowError {
                    line,
                    kind: RowErrorKind::Malformed(e.to_string()),
                }))
            }
        }
    }
}

struct JsonlRecords<R: Read> {
    lines: std::io::Lines<BufReader<R>>,
    line: u64,
}

impl<R: Read> JsonlRecords<R> {
    fn new(input: R) -> Self {
        JsonlRecords {
            lines: BufReader::new(input).lines(),
            line: 0,
        }
    }
}

impl<R: Read> Iterator for JsonlRecords<R> {
    type Item = Result<TransferRecord, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = self.lines.next()?;
            self.line += 1;
            let line = self.line;
            let text = match text {
                Ok(t) => t,
                Err(e) => {
                    return Some(Err(RowError {
                        line,
                        kind: RowErrorKind::Malformed(e.to_string()),
                    }))
                }
            };
            if text.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<RawRow>(&text)
                .map_err(|e| RowErrorKind::Malformed(e.to_string()))
                .and_then(TransferRecord::try_from);
            return Some(parsed.map_err(|kind| RowError { line, kind }));
        }
    }
}
