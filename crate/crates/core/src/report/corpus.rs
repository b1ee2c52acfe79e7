//! Synthetic multi-day corpora in the canonical log layout.

use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::ingest::{encode_binary_log, write_csv_log, LogFileName, LogFormat};
use crate::synth::{derive_seed, synth_order_flow, OrderFlowSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub stock_id: String,
    pub n_days: usize,
    /// First trading day as `yyyymmdd`; weekends are skipped.
    pub first_day: u32,
    pub binary: bool,
    pub flow: OrderFlowSpec,
}

/// The first `n` weekdays starting at `first` (inclusive, if a weekday).
pub fn trading_days(first: u32, n: usize) -> Result<Vec<u32>, ReportError> {
    let mut date = NaiveDate::from_ymd_opt((first / 10_000) as i32, first / 100 % 100, first % 100)
        .ok_or_else(|| ReportError::Config(format!("invalid date {first:08}")))?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(date.year() as u32 * 10_000 + date.month() * 100 + date.day());
        }
        date = date
            .succ_opt()
            .ok_or_else(|| ReportError::Config("date overflow".into()))?;
    }
    Ok(out)
}

/// Write one log per day; day `i` uses `derive_seed(seed, i)`.
pub fn write_corpus(dir: &Path, spec: &CorpusSpec, seed: u64) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(dir)?;
    let days = trading_days(spec.first_day, spec.n_days)?;
    days.par_iter()
        .enumerate()
        .map(|(i, &day)| {
            let synthetic = synth_order_flow(&spec.flow, derive_seed(seed, i as u64))
                .map_err(|e| ReportError::Config(e.to_string()))?;
            let name = LogFileName {
                stock_id: spec.stock_id.clone(),
                day,
                format: if spec.binary { LogFormat::Binary } else { LogFormat::Csv },
            };
            let path = dir.join(name.render());
            let bytes = if spec.binary {
                encode_binary_log(&synthetic.events)
            } else {
                let mut buf = Vec::new();
                write_csv_log(&mut buf, &synthetic.events)?;
                buf
            };
            std::fs::write(&path, bytes)?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_weekends() {
        // 2010-06-04 is a Friday
        assert_eq!(
            trading_days(20100604, 3).unwrap(),
            vec![20100604, 20100607, 20100608]
        );
        assert_eq!(trading_days(20101231, 1).unwrap(), vec![20101231]);
        assert_eq!(trading_days(20110101, 1).unwrap(), vec![20110103]);
        assert!(trading_days(20100230, 1).is_err());
    }
}
