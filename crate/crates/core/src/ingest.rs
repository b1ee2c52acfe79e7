//! Canonical order-book message logs.
//!
//! Two on-disk encodings carry the same record stream: a CSV text form with
//! header `timestamp,event_type,order_id,side,price,quantity`, and a compact
//! little-endian binary form (`LOBF0001` magic followed by 22-byte records).
//! Both parsers run the same day-level validation, so a valid day decodes to
//! an identical sequence from either encoding.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MS_PER_DAY: u32 = 86_400_000;
pub const CSV_HEADER: &str = "timestamp,event_type,order_id,side,price,quantity";
pub const BINARY_MAGIC: &[u8; 8] = b"LOBF0001";
pub const BINARY_RECORD_LEN: usize = 22;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: timestamp {timestamp} precedes previous timestamp {previous}")]
    NonMonotoneTimestamp {
        line: usize,
        timestamp: u32,
        previous: u32,
    },
    #[error("line {line}: order {order_id} added twice")]
    DuplicateAdd { line: usize, order_id: u64 },
    #[error("binary log length {len} leaves a partial record after the header")]
    TruncatedRecord { len: usize },
    #[error("binary log does not start with the LOBF0001 magic")]
    BadMagic,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventType {
    Add,
    Execute,
    Cancel,
    Delete,
}

impl EventType {
    pub fn code(self) -> u8 {
        match self {
            EventType::Add => 0,
            EventType::Execute => 1,
            EventType::Cancel => 2,
            EventType::Delete => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EventType::Add),
            1 => Some(EventType::Execute),
            2 => Some(EventType::Cancel),
            3 => Some(EventType::Delete),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventType::Add => "ADD",
            EventType::Execute => "EXECUTE",
            EventType::Cancel => "CANCEL",
            EventType::Delete => "DELETE",
        }
    }
}

impl FromStr for EventType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ADD" => Ok(EventType::Add),
            "EXECUTE" => Ok(EventType::Execute),
            "CANCEL" => Ok(EventType::Cancel),
            "DELETE" => Ok(EventType::Delete),
            other => Err(format!("unknown event type `{other}`")),
        }
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    #[serde(alias = "bid")]
    Bid,
    #[serde(alias = "ask")]
    Ask,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Bid, Side::Ask];

    pub fn code(self) -> u8 {
        match self {
            Side::Bid => 0,
            Side::Ask => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Side::Bid),
            1 => Some(Side::Ask),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bid => "BID",
            Side::Ask => "ASK",
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Bid => Side::Ask,
            Side::Ask => Side::Bid,
        }
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BID" | "bid" => Ok(Side::Bid),
            "ASK" | "ask" => Ok(Side::Ask),
            other => Err(format!("unknown side `{other}`")),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One normalized order-book message. Timestamps are exchange-local
/// milliseconds since midnight; prices are integer ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub timestamp: u32,
    pub event_type: EventType,
    pub order_id: u64,
    pub side: Side,
    pub price: u32,
    pub quantity: u32,
}

impl EventRecord {
    pub fn new(
        timestamp: u32,
        event_type: EventType,
        order_id: u64,
        side: Side,
        price: u32,
        quantity: u32,
    ) -> Self {
        Self {
            timestamp,
            event_type,
            order_id,
            side,
            price,
            quantity,
        }
    }

    fn check_fields(&self) -> Result<(), String> {
        if self.timestamp >= MS_PER_DAY {
            return Err(format!("timestamp {} outside the day", self.timestamp));
        }
        if self.quantity == 0 && self.event_type != EventType::Delete {
            return Err(format!("{} with zero quantity", self.event_type));
        }
        Ok(())
    }
}

/// Trading-session bounds with a symmetric trim. Events are kept on the
/// half-open interval `[open + trim, close - trim)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionWindow {
    pub open: u32,
    pub close: u32,
    pub trim: u32,
}

impl SessionWindow {
    pub const DEFAULT_TRIM_MS: u32 = 30 * 60 * 1000;

    pub fn new(open: u32, close: u32, trim: u32) -> Result<Self, String> {
        let window = Self { open, close, trim };
        window.validate()?;
        Ok(window)
    }

    pub fn validate(&self) -> Result<(), String> {
        let start = self.open as u64 + self.trim as u64;
        let end = (self.close as i64) - (self.trim as i64);
        if (start as i64) >= end {
            return Err(format!(
                "session window {}..{} with trim {} is empty",
                self.open, self.close, self.trim
            ));
        }
        if self.close > MS_PER_DAY {
            return Err(format!("session close {} beyond end of day", self.close));
        }
        Ok(())
    }

    /// First admitted millisecond.
    pub fn start(&self) -> u32 {
        self.open + self.trim
    }

    /// First excluded millisecond.
    pub fn end(&self) -> u32 {
        self.close - self.trim
    }

    pub fn contains(&self, timestamp: u32) -> bool {
        timestamp >= self.start() && timestamp < self.end()
    }

    pub fn len_ms(&self) -> u32 {
        self.end() - self.start()
    }
}

/// Parse `HH:MM`, `HH:MM:SS` or `HH:MM:SS.mmm` into milliseconds since midnight.
pub fn parse_clock(text: &str) -> Result<u32, String> {
    let (hms, millis) = match text.split_once('.') {
        Some((hms, ms)) => {
            let ms: u32 = ms.parse().map_err(|_| format!("bad milliseconds in `{text}`"))?;
            (hms, ms)
        }
        None => (text, 0),
    };
    let parts: Vec<&str> = hms.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(format!("expected HH:MM[:SS[.mmm]], got `{text}`"));
    }
    let mut fields = [0u32; 3];
    for (slot, part) in fields.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("bad clock field in `{text}`"))?;
    }
    let [h, m, s] = fields;
    if h > 24 || m > 59 || s > 59 || millis > 999 {
        return Err(format!("clock time out of range: `{text}`"));
    }
    let total = ((h * 60 + m) * 60 + s) * 1000 + millis;
    if total > MS_PER_DAY {
        return Err(format!("clock time beyond end of day: `{text}`"));
    }
    Ok(total)
}

/// Day-level validation shared by both decoders: nondecreasing timestamps
/// and unique ADD ids.
#[derive(Default)]
struct DayValidator {
    previous: Option<u32>,
    added: HashSet<u64>,
}

impl DayValidator {
    fn check(&mut self, line: usize, record: &EventRecord) -> Result<(), IngestError> {
        record
            .check_fields()
            .map_err(|reason| IngestError::MalformedLine { line, reason })?;
        if let Some(previous) = self.previous {
            if record.timestamp < previous {
                return Err(IngestError::NonMonotoneTimestamp {
                    line,
                    timestamp: record.timestamp,
                    previous,
                });
            }
        }
        self.previous = Some(record.timestamp);
        if record.event_type == EventType::Add && !self.added.insert(record.order_id) {
            return Err(IngestError::DuplicateAdd {
                line,
                order_id: record.order_id,
            });
        }
        Ok(())
    }
}

fn parse_csv_fields(line: usize, text: &str) -> Result<EventRecord, IngestError> {
    let malformed = |reason: String| IngestError::MalformedLine { line, reason };
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 6 {
        return Err(malformed(format!("expected 6 fields, found {}", fields.len())));
    }
    let timestamp = fields[0]
        .parse::<u32>()
        .map_err(|e| malformed(format!("timestamp: {e}")))?;
    let event_type = fields[1].parse::<EventType>().map_err(malformed)?;
    let order_id = fields[2]
        .parse::<u64>()
        .map_err(|e| malformed(format!("order_id: {e}")))?;
    let side = match fields[3] {
        "BID" => Side::Bid,
        "ASK" => Side::Ask,
        other => return Err(malformed(format!("unknown side `{other}`"))),
    };
    let price = fields[4]
        .parse::<u32>()
        .map_err(|e| malformed(format!("price: {e}")))?;
    let quantity = fields[5]
        .parse::<u32>()
        .map_err(|e| malformed(format!("quantity: {e}")))?;
    Ok(EventRecord::new(timestamp, event_type, order_id, side, price, quantity))
}

/// Parse a CSV log. Line numbers in errors are 1-based and count the header.
pub fn parse_csv_log<R: BufRead>(reader: R) -> Result<Vec<EventRecord>, IngestError> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header.trim_end_matches('\r') != CSV_HEADER {
                return Err(IngestError::MalformedLine {
                    line: 1,
                    reason: format!("expected header `{CSV_HEADER}`"),
                });
            }
        }
        None => {
            return Err(IngestError::MalformedLine {
                line: 1,
                reason: "missing header".into(),
            })
        }
    }

    let mut validator = DayValidator::default();
    let mut records = Vec::new();
    for (idx, text) in lines.enumerate() {
        let line = idx + 2;
        let text = text?;
        let text = text.trim_end_matches('\r');
        if text.is_empty() {
            continue;
        }
        let record = parse_csv_fields(line, text)?;
        validator.check(line, &record)?;
        records.push(record);
    }
    Ok(records)
}

pub fn parse_csv_str(text: &str) -> Result<Vec<EventRecord>, IngestError> {
    parse_csv_log(text.as_bytes())
}

pub fn write_csv_log<W: Write>(mut writer: W, records: &[EventRecord]) -> std::io::Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            r.timestamp, r.event_type, r.order_id, r.side, r.price, r.quantity
        )?;
    }
    Ok(())
}

/// Decode a binary log held in memory. Record indices in errors are 1-based.
pub fn decode_binary_log(bytes: &[u8]) -> Result<Vec<EventRecord>, IngestError> {
    if bytes.len() < BINARY_MAGIC.len() || &bytes[..BINARY_MAGIC.len()] != BINARY_MAGIC {
        return Err(IngestError::BadMagic);
    }
    let body = &bytes[BINARY_MAGIC.len()..];
    if !body.len().is_multiple_of(BINARY_RECORD_LEN) {
        return Err(IngestError::TruncatedRecord { len: bytes.len() });
    }
    let mut validator = DayValidator::default();
    let mut records = Vec::with_capacity(body.len() / BINARY_RECORD_LEN);
    for (idx, chunk) in body.chunks_exact(BINARY_RECORD_LEN).enumerate() {
        let line = idx + 1;
        let malformed = |reason: String| IngestError::MalformedLine { line, reason };
        let timestamp = u32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let event_type = EventType::from_code(chunk[4])
            .ok_or_else(|| malformed(format!("event type code {}", chunk[4])))?;
        let order_id = u64::from_le_bytes(chunk[5..13].try_into().unwrap());
        let side =
            Side::from_code(chunk[13]).ok_or_else(|| malformed(format!("side code {}", chunk[13])))?;
        let price = u32::from_le_bytes(chunk[14..18].try_into().unwrap());
        let quantity = u32::from_le_bytes(chunk[18..22].try_into().unwrap());
        let record = EventRecord::new(timestamp, event_type, order_id, side, price, quantity);
        validator.check(line, &record)?;
        records.push(record);
    }
    Ok(records)
}

pub fn parse_binary_log<R: Read>(mut reader: R) -> Result<Vec<EventRecord>, IngestError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode_binary_log(&bytes)
}

pub fn encode_binary_log(records: &[EventRecord]) -> Vec<u8> {
    let mut out = Vec::with_capacity(BINARY_MAGIC.len() + records.len() * BINARY_RECORD_LEN);
    out.extend_from_slice(BINARY_MAGIC);
    for r in records {
        out.extend_from_slice(&r.timestamp.to_le_bytes());
        out.push(r.event_type.code());
        out.extend_from_slice(&r.order_id.to_le_bytes());
        out.push(r.side.code());
        out.extend_from_slice(&r.price.to_le_bytes());
        out.extend_from_slice(&r.quantity.to_le_bytes());
    }
    out
}

/// Keep events inside the session window. Input order is preserved.
pub fn apply_session_filter(events: &[EventRecord], window: &SessionWindow) -> Vec<EventRecord> {
    events
        .iter()
        .filter(|e| window.contains(e.timestamp))
        .copied()
        .collect()
}

/// Log encoding inferred from a file name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Binary,
}

/// `<stockid>_<yyyymmdd>.(csv|lob)`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogFileName {
    pub stock_id: String,
    pub day: u32,
    pub format: LogFormat,
}

impl LogFileName {
    pub fn parse(file_name: &str) -> Option<Self> {
        let (stem, ext) = file_name.rsplit_once('.')?;
        let format = match ext {
            "csv" => LogFormat::Csv,
            "lob" => LogFormat::Binary,
            _ => return None,
        };
        let (stock_id, day) = stem.rsplit_once('_')?;
        if stock_id.is_empty() || day.len() != 8 || !day.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(Self {
            stock_id: stock_id.to_string(),
            day: day.parse().ok()?,
            format,
        })
    }

    pub fn render(&self) -> String {
        let ext = match self.format {
            LogFormat::Csv => "csv",
            LogFormat::Binary => "lob",
        };
        format!("{}_{:08}.{}", self.stock_id, self.day, ext)
    }
}

/// Read a whole log file, choosing the decoder from its extension.
pub fn read_log_file(path: &std::path::Path) -> Result<Vec<EventRecord>, IngestError> {
    let bytes = std::fs::read(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("lob") => decode_binary_log(&bytes),
        _ => parse_csv_log(bytes.as_slice()),
    }
}
