//! Per-day duration series derived from classified book events.
//!
//! Inter-event variables take consecutive timestamp differences between
//! qualifying events. Lifetime variables take the submission-to-terminal
//! delay reported on each trade or cancel.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::book::{ClassifiedEvent, EventKind};
use crate::ingest::Side;

pub const CSV_HEADER: &str = "stock,day,side,variable,index,duration_ms";
pub const BINARY_MAGIC: &[u8; 8] = b"LOBD0001";

#[derive(Debug, Error)]
pub enum DurationError {
    #[error("cannot concatenate series with different keys: {0}")]
    MixedKey(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("binary duration file: {0}")]
    BadBinary(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "or-or")]
    OrOr,
    #[serde(rename = "tr-tr")]
    TrTr,
    #[serde(rename = "ca-ca")]
    CaCa,
    #[serde(rename = "or-tr")]
    OrTr,
    #[serde(rename = "or-ca")]
    OrCa,
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::OrOr,
        Variable::TrTr,
        Variable::CaCa,
        Variable::OrTr,
        Variable::OrCa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variable::OrOr => "or-or",
            Variable::TrTr => "tr-tr",
            Variable::CaCa => "ca-ca",
            Variable::OrTr => "or-tr",
            Variable::OrCa => "or-ca",
        }
    }

    /// Event kind whose occurrences (or terminations) feed this variable.
    pub fn kind(self) -> EventKind {
        match self {
            Variable::OrOr => EventKind::Order,
            Variable::TrTr | Variable::OrTr => EventKind::Trade,
            Variable::CaCa | Variable::OrCa => EventKind::Cancel,
        }
    }

    pub fn is_lifetime(self) -> bool {
        matches!(self, Variable::OrTr | Variable::OrCa)
    }

    pub fn code(self) -> u8 {
        match self {
            Variable::OrOr => 0,
            Variable::TrTr => 1,
            Variable::CaCa => 2,
            Variable::OrTr => 3,
            Variable::OrCa => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Variable::ALL.get(code as usize).copied()
    }
}

impl FromStr for Variable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variable `{s}` (expected or-or, tr-tr, ca-ca, or-tr, or-ca)"))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationSeries {
    pub stock_id: String,
    /// Trading day as `yyyymmdd`.
    pub day: u32,
    pub side: Side,
    pub variable: Variable,
    pub values: Vec<u32>,
}

impl DurationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    fn key(&self) -> (&str, Side, Variable) {
        (&self.stock_id, self.side, self.variable)
    }
}

/// Extraction switches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DurationConfig {
    /// Inter-event variables restricted to events at the best level.
    pub best_only: BTreeSet<Variable>,
    /// Remove zero durations (timestamp ties) after extraction.
    pub drop_zeros: bool,
}

impl Default for DurationConfig {
    fn default() -> Self {
        Self {
            best_only: [Variable::CaCa].into_iter().collect(),
            drop_zeros: false,
        }
    }
}

fn qualifies(e: &ClassifiedEvent, kind: EventKind, side: Side, best_only: bool) -> bool {
    e.kind == kind && e.side == side && (!best_only || e.at_best)
}

/// Consecutive timestamp differences between qualifying events.
pub fn inter_event_durations(
    events: &[ClassifiedEvent],
    kind: EventKind,
    side: Side,
    best_only: bool,
) -> Vec<u32> {
    let times: Vec<u32> = events
        .iter()
        .filter(|e| qualifies(e, kind, side, best_only))
        .map(|e| e.timestamp)
        .collect();
    times.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Lifetimes carried by TRADE or CANCEL events, in event order.
pub fn lifetime_durations(events: &[ClassifiedEvent], terminal: EventKind, side: Side) -> Vec<u32> {
    events
        .iter()
        .filter(|e| e.kind == terminal && e.side == side)
        .filter_map(|e| e.lifetime_ms)
        .collect()
}

/// Events that feed `variable` under `config`; used for per-day quantity
/// statistics alongside the series.
pub fn qualifying_events<'a>(
    events: &'a [ClassifiedEvent],
    variable: Variable,
    side: Side,
    config: &DurationConfig,
) -> impl Iterator<Item = &'a ClassifiedEvent> + 'a {
    let best_only = !variable.is_lifetime() && config.best_only.contains(&variable);
    let kind = variable.kind();
    events
        .iter()
        .filter(move |e| qualifies(e, kind, side, best_only))
}

pub fn extract(
    stock_id: &str,
    day: u32,
    events: &[ClassifiedEvent],
    variable: Variable,
    side: Side,
    config: &DurationConfig,
) -> DurationSeries {
    let mut values = if variable.is_lifetime() {
        lifetime_durations(events, variable.kind(), side)
    } else {
        inter_event_durations(events, variable.kind(), side, config.best_only.contains(&variable))
    };
    if config.drop_zeros {
        values.retain(|&v| v > 0);
    }
    DurationSeries {
        stock_id: stock_id.to_string(),
        day,
        side,
        variable,
        values,
    }
}

/// Join daily series in day order. No overnight durations are inserted.
pub fn concat_days(series: &[DurationSeries]) -> Result<DurationSeries, DurationError> {
    let first = series
        .first()
        .ok_or_else(|| DurationError::MixedKey("no series to concatenate".into()))?;
    let mut values = Vec::with_capacity(series.iter().map(|s| s.len()).sum());
    for s in series {
        if s.key() != first.key() {
            return Err(DurationError::MixedKey(format!(
                "{}/{}/{} vs {}/{}/{}",
                first.stock_id, first.side, first.variable, s.stock_id, s.side, s.variable
            )));
        }
        values.extend_from_slice(&s.values);
    }
    Ok(DurationSeries {
        stock_id: first.stock_id.clone(),
        day: first.day,
        side: first.side,
        variable: first.variable,
        values,
    })
}

pub fn write_csv<W: Write>(mut writer: W, series: &[DurationSeries]) -> std::io::Result<()> {
    writeln!(writer, "{CSV_HEADER}")?;
    for s in series {
        for (i, v) in s.values.iter().enumerate() {
            writeln!(
                writer,
                "{},{:08},{},{},{},{}",
                s.stock_id, s.day, s.side, s.variable, i, v
            )?;
        }
    }
    Ok(())
}

/// Read series written by [`write_csv`]. Rows must be grouped per series
/// with consecutive indices.
pub fn read_csv<R: BufRead>(reader: R) -> Result<Vec<DurationSeries>, DurationError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end() != CSV_HEADER {
        return Err(DurationError::Malformed {
            line: 1,
            reason: format!("expected header `{CSV_HEADER}`"),
        });
    }
    let mut out: Vec<DurationSeries> = Vec::new();
    for (idx, text) in lines.enumerate() {
        let line = idx + 2;
        let text = text?;
        let text = text.trim_end();
        if text.is_empty() {
            continue;
        }
        let bad = |reason: String| DurationError::Malformed { line, reason };
        let f: Vec<&str> = text.split(',').collect();
        if f.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", f.len())));
        }
        let day: u32 = f[1].parse().map_err(|e| bad(format!("day: {e}")))?;
        let side: Side = f[2].parse().map_err(bad)?;
        let variable: Variable = f[3].parse().map_err(bad)?;
        let index: usize = f[4].parse().map_err(|e| bad(format!("index: {e}")))?;
        let value: u32 = f[5].parse().map_err(|e| bad(format!("duration_ms: {e}")))?;
        let continues = out.last().is_some_and(|s| {
            s.stock_id == f[0] && s.day == day && s.side == side && s.variable == variable
        });
        if !continues {
            out.push(DurationSeries {
                stock_id: f[0].to_string(),
                day,
                side,
                variable,
                values: Vec::new(),
            });
        }
        let current = out.last_mut().expect("pushed above");
        if index != current.values.len() {
            return Err(bad(format!("expected index {}, found {index}", current.values.len())));
        }
        current.values.push(value);
    }
    Ok(out)
}

/// Binary mirror: `LOBD0001`, then per series `u16 stock_len, stock bytes,
/// u32 day, u8 side, u8 variable, u32 count, count x u32 durations`, all
/// little-endian.
pub fn encode_binary(series: &[DurationSeries]) -> Vec<u8> {
    let mut out = BINARY_MAGIC.to_vec();
    for s in series {
        let stock = s.stock_id.as_bytes();
        out.extend_from_slice(&(stock.len() as u16).to_le_bytes());
        out.extend_from_slice(stock);
        out.extend_from_slice(&s.day.to_le_bytes());
        out.push(s.side.code());
        out.push(s.variable.code());
        out.extend_from_slice(&(s.values.len() as u32).to_le_bytes());
        for v in &s.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<DurationSeries>, DurationError> {
    if !bytes.starts_with(BINARY_MAGIC) {
        return Err(DurationError::BadBinary("missing LOBD0001 magic".into()));
    }
    let mut cursor = &bytes[BINARY_MAGIC.len()..];
    let mut take = |n: usize| -> Result<&[u8], DurationError> {
        if cursor.len() < n {
            return Err(DurationError::BadBinary("truncated".into()));
        }
        let (head, tail) = cursor.split_at(n);
        cursor = tail;
        Ok(head)
    };
    let mut out = Vec::new();
    while let Ok(len_bytes) = take(2) {
        let stock_len = u16::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
        let stock_id = String::from_utf8(take(stock_len)?.to_vec())
            .map_err(|_| DurationError::BadBinary("stock id is not UTF-8".into()))?;
        let day = u32::from_le_bytes(take(4)?.try_into().unwrap());
        let side_code = take(1)?[0];
        let side = Side::from_code(side_code)
            .ok_or_else(|| DurationError::BadBinary(format!("side code {side_code}")))?;
        let var_code = take(1)?[0];
        let variable = Variable::from_code(var_code)
            .ok_or_else(|| DurationError::BadBinary(format!("variable code {var_code}")))?;
        let count = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let body = take(count * 4)?;
        let values = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push(DurationSeries {
            stock_id,
            day,
            side,
            variable,
            values,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cancel(t: u32, side: Side, at_best: bool, lifetime: u32) -> ClassifiedEvent {
        ClassifiedEvent {
            timestamp: t,
            kind: EventKind::Cancel,
            side,
            at_best,
            order_id: t as u64,
            price: 100,
            quantity: 1,
            lifetime_ms: Some(lifetime),
        }
    }

    #[test]
    fn consecutive_differences_keep_ties() {
        let events: Vec<_> = [100, 350, 350, 900]
            .into_iter()
            .map(|t| cancel(t, Side::Bid, true, 0))
            .collect();
        assert_eq!(
            inter_event_durations(&events, EventKind::Cancel, Side::Bid, true),
            vec![250, 0, 550]
        );
    }

    #[test]
    fn single_event_yields_empty() {
        let events = [cancel(5, Side::Ask, true, 0)];
        assert!(inter_event_durations(&events, EventKind::Cancel, Side::Ask, false).is_empty());
        assert!(inter_event_durations(&[], EventKind::Cancel, Side::Ask, false).is_empty());
    }

    #[test]
    fn best_only_filter_and_side_filter() {
        let events = [
            cancel(10, Side::Bid, true, 0),
            cancel(20, Side::Bid, false, 0),
            cancel(25, Side::Ask, true, 0),
            cancel(40, Side::Bid, true, 0),
        ];
        assert_eq!(
            inter_event_durations(&events, EventKind::Cancel, Side::Bid, true),
            vec![30]
        );
        assert_eq!(
            inter_event_durations(&events, EventKind::Cancel, Side::Bid, false),
            vec![10, 20]
        );
    }

    #[test]
    fn lifetimes_in_terminal_order() {
        let events = [cancel(400, Side::Bid, true, 300)];
        assert_eq!(lifetime_durations(&events, EventKind::Cancel, Side::Bid), vec![300]);
        assert!(lifetime_durations(&events, EventKind::Trade, Side::Bid).is_empty());
    }

    #[test]
    fn drop_zeros_flag() {
        let events: Vec<_> = [100, 350, 350, 900]
            .into_iter()
            .map(|t| cancel(t, Side::Bid, true, 0))
            .collect();
        let cfg = DurationConfig {
            drop_zeros: true,
            ..Default::default()
        };
        let s = extract("X", 20200101, &events, Variable::CaCa, Side::Bid, &cfg);
        assert_eq!(s.values, vec![250, 550]);
    }

    #[test]
    fn concat_checks_keys() {
        let mk = |day, side, values: Vec<u32>| DurationSeries {
            stock_id: "S".into(),
            day,
            side,
            variable: Variable::TrTr,
            values,
        };
        let joined = concat_days(&[mk(1, Side::Bid, vec![1, 2]), mk(2, Side::Bid, vec![3])]).unwrap();
        assert_eq!(joined.values, vec![1, 2, 3]);
        assert!(matches!(
            concat_days(&[mk(1, Side::Bid, vec![1]), mk(2, Side::Ask, vec![3])]),
            Err(DurationError::MixedKey(_))
        ));
        assert!(concat_days(&[]).is_err());
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let series = vec![
            DurationSeries {
                stock_id: "FI1".into(),
                day: 20100601,
                side: Side::Ask,
                variable: Variable::OrCa,
                values: vec![5, 0, 17],
            },
            DurationSeries {
                stock_id: "FI1".into(),
                day: 20100602,
                side: Side::Ask,
                variable: Variable::OrCa,
                values: vec![9],
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("stock,day,side,variable,index,duration_ms\nFI1,20100601,ASK,or-ca,0,5\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), series);
        assert_eq!(decode_binary(&encode_binary(&series)).unwrap(), series);
        assert!(decode_binary(b"nope").is_err());
        let mut truncated = encode_binary(&series);
        truncated.pop();
        assert!(decode_binary(&truncated).is_err());
    }

    #[test]
    fn variable_labels() {
        for v in Variable::ALL {
            assert_eq!(v.as_str().parse::<Variable>().unwrap(), v);
            assert_eq!(Variable::from_code(v.code()), Some(v));
        }
        assert!("xx-yy".parse::<Variable>().is_err());
    }
}
