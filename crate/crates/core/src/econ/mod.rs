//! Daily economic variables and their correlation with daily exponents.

pub mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::book::{ClassifiedEvent, MidPoint};
use crate::durations::{qualifying_events, DurationConfig, DurationSeries, Variable};
use crate::ingest::{SessionWindow, Side};

pub const SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EconError {
    #[error("day has an empty duration series")]
    EmptyDay,
    #[error("no sub-sampling grid has two valid mid-price samples")]
    InsufficientPath,
    #[error("invalid realized-variance grid: {0}")]
    BadGrid(String),
    #[error("need at least 3 complete pairs, got {0}")]
    InsufficientData(usize),
    #[error("one input has zero variance")]
    ZeroVariance,
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Sub-sampled realized-variance settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RvConfig {
    pub grid_seconds: u32,
    pub n_offsets: u32,
}

impl Default for RvConfig {
    fn default() -> Self {
        Self {
            grid_seconds: 300,
            n_offsets: 30,
        }
    }
}

impl RvConfig {
    pub fn validate(&self) -> Result<(), EconError> {
        let grid_ms = self.grid_seconds as u64 * 1000;
        if self.grid_seconds == 0 || self.n_offsets == 0 {
            return Err(EconError::BadGrid("grid and offset count must be positive".into()));
        }
        if !grid_ms.is_multiple_of(self.n_offsets as u64) {
            return Err(EconError::BadGrid(format!(
                "{} offsets do not divide a {} s grid into whole milliseconds",
                self.n_offsets, self.grid_seconds
            )));
        }
        Ok(())
    }
}

/// Last-known mid at `t`, if both sides were populated.
fn mid_at(path: &[MidPoint], t: u32) -> Option<f64> {
    let idx = path.partition_point(|m| m.timestamp <= t);
    if idx == 0 {
        None
    } else {
        path[idx - 1].mid
    }
}

/// Sub-sampling and averaging realized variance.
///
/// For each offset `o` in `0, step, 2 step, ...` (step = grid / n_offsets),
/// the mid-price is sampled last-value-forward at `start + o + k * grid` up
/// to `end`, and squared log returns between consecutive valid samples are
/// summed. The result is the mean of the sums over the grids that have at
/// least two valid samples.
pub fn realized_variance(
    path: &[MidPoint],
    start: u32,
    end: u32,
    config: &RvConfig,
) -> Result<f64, EconError> {
    config.validate()?;
    let grid = config.grid_seconds as u64 * 1000;
    let step = grid / config.n_offsets as u64;
    let mut total = 0.0;
    let mut used = 0usize;
    for j in 0..config.n_offsets as u64 {
        let mut t = start as u64 + j * step;
        let mut prev: Option<f64> = None;
        let mut samples = 0usize;
        let mut sum = 0.0;
        while t <= end as u64 {
            if let Some(mid) = mid_at(path, t as u32) {
                if let Some(p) = prev {
                    sum += (mid / p).ln().powi(2);
                }
                prev = Some(mid);
                samples += 1;
            }
            t += grid;
        }
        if samples >= 2 {
            total += sum;
            used += 1;
        }
    }
    if used == 0 {
        return Err(EconError::InsufficientPath);
    }
    Ok(total / used as f64)
}

/// `ln(last mid / first mid)` over valid mids inside `[start, end)`.
pub fn daily_log_return(path: &[MidPoint], start: u32, end: u32) -> Option<f64> {
    let mut valid = path
        .iter()
        .rev()
        .filter(|m| m.timestamp >= start && m.timestamp < end)
        .filter_map(|m| m.mid);
    let last = valid.next()?;
    let first = valid.next_back().unwrap_or(last);
    Some((last / first).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyEcon {
    pub stock_id: String,
    pub day: u32,
    pub side: Side,
    pub variable: Variable,
    pub avg_duration_ms: f64,
    pub activity: usize,
    pub avg_quantity: f64,
    /// `None` when the day never had a two-sided book.
    pub daily_log_return: Option<f64>,
    /// `None` when no sampling grid had two valid mids.
    pub realized_variance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EconField {
    AvgDuration,
    Activity,
    AvgQuantity,
    DailyReturn,
    RealizedVariance,
}

impl EconField {
    pub const ALL: [EconField; 5] = [
        EconField::AvgDuration,
        EconField::Activity,
        EconField::AvgQuantity,
        EconField::DailyReturn,
        EconField::RealizedVariance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EconField::AvgDuration => "avg_duration",
            EconField::Activity => "activity",
            EconField::AvgQuantity => "avg_quantity",
            EconField::DailyReturn => "daily_return",
            EconField::RealizedVariance => "realized_variance",
        }
    }
}

impl FromStr for EconField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EconField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown economic variable `{s}`"))
    }
}

impl fmt::Display for EconField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl DailyEcon {
    pub fn field(&self, field: EconField) -> Option<f64> {
        match field {
            EconField::AvgDuration => Some(self.avg_duration_ms),
            EconField::Activity => Some(self.activity as f64),
            EconField::AvgQuantity => Some(self.avg_quantity),
            EconField::DailyReturn => self.daily_log_return,
            EconField::RealizedVariance => self.realized_variance,
        }
    }
}

/// Economic record for one (stock, day, side, variable).
pub fn daily_economics(
    series: &DurationSeries,
    events: &[ClassifiedEvent],
    mids: &[MidPoint],
    session: &SessionWindow,
    durations: &DurationConfig,
    rv: &RvConfig,
) -> Result<DailyEcon, EconError> {
    if series.is_empty() {
        return Err(EconError::EmptyDay);
    }
    let avg_duration_ms =
        series.values.iter().map(|&v| v as f64).sum::<f64>() / series.len() as f64;
    let (qty_sum, qty_n) = qualifying_events(events, series.variable, series.side, durations)
        .fold((0.0, 0usize), |(s, n), e| (s + e.quantity as f64, n + 1));
    let avg_quantity = if qty_n > 0 { qty_sum / qty_n as f64 } else { 0.0 };
    let realized = match realized_variance(mids, session.start(), session.end(), rv) {
        Ok(v) => Some(v),
        Err(EconError::InsufficientPath) => None,
        Err(e) => return Err(e),
    };
    Ok(DailyEcon {
        stock_id: series.stock_id.clone(),
        day: series.day,
        side: series.side,
        variable: series.variable,
        avg_duration_ms,
        activity: series.len(),
        avg_quantity,
        daily_log_return: daily_log_return(mids, session.start(), session.end()),
        realized_variance: realized,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
    pub r_critical: f64,
    pub significant_99: bool,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EconError> {
    if x.len() != y.len() {
        return Err(EconError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EconError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of day-paired values with the two-sided 1% test.
/// Days missing on either side are dropped.
pub fn correlate(alphas: &[Option<f64>], econ: &[Option<f64>]) -> Result<CorrelationResult, EconError> {
    if alphas.len() != econ.len() {
        return Err(EconError::LengthMismatch(alphas.len(), econ.len()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = alphas
        .iter()
        .zip(econ)
        .filter_map(|(a, e)| match (a, e) {
            (Some(a), Some(e)) if a.is_finite() && e.is_finite() => Some((*a, *e)),
            _ => None,
        })
        .unzip();
    let n = x.len();
    if n < 3 {
        return Err(EconError::InsufficientData(n));
    }
    let r = pearson(&x, &y)?;
    let r_critical = stats::pearson_critical_r(n, SIGNIFICANCE);
    Ok(CorrelationResult {
        r,
        n,
        r_critical,
        significant_99: r.abs() > r_critical,
    })
}
