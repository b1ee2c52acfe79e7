use serde::{Deserialize, Serialize};

use super::{
    default_scales, fluctuation, log_spaced_scales, DfaError, DfaOptions, FluctuationCurve,
    DEFAULT_MIN_SCALE, DEFAULT_SCALES_PER_DECADE,
};
use crate::durations::DurationSeries;

/// Half-open scale interval `(lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRange {
    pub lo: f64,
    pub hi: f64,
}

impl FitRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const ALL: FitRange = FitRange {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }
}

/// Normalized-scale bands for the intra-day, day and month exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Intraday,
    Day,
    Month,
}

pub const INTRADAY_BAND: FitRange = FitRange::new(0.003, 0.1);
pub const DAY_BAND: FitRange = FitRange::new(0.3, 3.0);
pub const MONTH_BAND: FitRange = FitRange::new(10.0, 100.0);

impl Band {
    pub const ALL: [Band; 3] = [Band::Intraday, Band::Day, Band::Month];

    pub fn range(self) -> FitRange {
        match self {
            Band::Intraday => INTRADAY_BAND,
            Band::Day => DAY_BAND,
            Band::Month => MONTH_BAND,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Band::Intraday => "alpha1",
            Band::Day => "alpha2",
            Band::Month => "alpha3",
        }
    }
}

/// OLS fit of `log10 F` on `log10 s` (or `log10 s~` when normalized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    pub range: FitRange,
    pub normalized: bool,
    pub r_squared: f64,
    pub n_points: usize,
    pub stderr_alpha: f64,
}

pub fn fit_alpha(
    curve: &FluctuationCurve,
    range: FitRange,
    normalized: bool,
) -> Result<ScalingFit, DfaError> {
    let norm = if normalized {
        curve.normalization.ok_or(DfaError::MissingNormalization)?
    } else {
        1.0
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&s, &f) in curve.scales.iter().zip(&curve.fluctuations) {
        let x = s as f64 / norm;
        if !range.contains(x) {
            continue;
        }
        if f <= 0.0 {
            return Err(DfaError::ZeroFluctuationInRange);
        }
        xs.push(x.log10());
        ys.push(f.log10());
    }
    let n = xs.len();
    if n < 2 {
        return Err(DfaError::InsufficientPoints { found: n });
    }
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let alpha = sxy / sxx;
    let intercept = mean_y - alpha * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + alpha * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let stderr_alpha = if n > 2 {
        (ss_res / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ScalingFit {
        alpha,
        intercept,
        range,
        normalized,
        r_squared,
        n_points: n,
        stderr_alpha,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandFit {
    pub band: Band,
    pub fit: Result<ScalingFit, DfaError>,
}

/// The three band exponents. A band without enough points carries its own
/// error and does not affect the others.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalAlphas {
    pub bands: [BandFit; 3],
}

impl LocalAlphas {
    pub fn get(&self, band: Band) -> &Result<ScalingFit, DfaError> {
        &self.bands[band as usize].fit
    }
}

pub fn local_alphas(curve: &FluctuationCurve) -> Result<LocalAlphas, DfaError> {
    local_alphas_with(curve, &Band::ALL.map(Band::range))
}

/// Band exponents with overridden ranges, in `Band::ALL` order.
pub fn local_alphas_with(
    curve: &FluctuationCurve,
    ranges: &[FitRange; 3],
) -> Result<LocalAlphas, DfaError> {
    if curve.normalization.is_none() {
        return Err(DfaError::MissingNormalization);
    }
    let bands = Band::ALL.map(|band| BandFit {
        band,
        fit: fit_alpha(curve, ranges[band as usize], true),
    });
    Ok(LocalAlphas { bands })
}

/// Which part of a within-day curve the daily exponent is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitBand {
    #[default]
    Full,
    /// Normalized intra-day band only.
    Intra,
}

impl std::str::FromStr for FitBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(FitBand::Full),
            "intra" => Ok(FitBand::Intra),
            other => Err(format!("unknown fit band `{other}` (expected intra|full)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyAlphaConfig {
    pub min_length: usize,
    pub min_scale: usize,
    pub scales_per_decade: usize,
    pub dfa: DfaOptions,
    pub fit_band: FitBand,
}

impl Default for DailyAlphaConfig {
    fn default() -> Self {
        Self {
            min_length: 64,
            min_scale: DEFAULT_MIN_SCALE,
            scales_per_decade: DEFAULT_SCALES_PER_DECADE,
            dfa: DfaOptions::default(),
            fit_band: FitBand::Full,
        }
    }
}

impl DailyAlphaConfig {
    pub fn scales(&self, n: usize) -> Vec<usize> {
        if self.min_scale == DEFAULT_MIN_SCALE && self.scales_per_decade == DEFAULT_SCALES_PER_DECADE {
            default_scales(n)
        } else {
            log_spaced_scales(self.min_scale, n / 4, self.scales_per_decade)
        }
    }
}

/// Within-day fluctuation curve and exponent of one day's series.
///
/// `normalization` is the average daily count used by the intra-day band;
/// when absent the day's own length is used.
pub fn daily_curve_and_alpha(
    values: &[f64],
    config: &DailyAlphaConfig,
    normalization: Option<f64>,
) -> Result<(FluctuationCurve, ScalingFit), DfaError> {
    if values.len() < config.min_length {
        return Err(DfaError::SeriesTooShort {
            len: values.len(),
            min: config.min_length,
        });
    }
    let scales = config.scales(values.len());
    let curve = fluctuation(values, &scales, &config.dfa)?
        .with_normalization(normalization.unwrap_or(values.len() as f64));
    let fit = match config.fit_band {
        FitBand::Full => fit_alpha(&curve, FitRange::ALL, false)?,
        FitBand::Intra => fit_alpha(&curve, INTRADAY_BAND, true)?,
    };
    Ok((curve, fit))
}

pub fn daily_alpha(series: &DurationSeries, config: &DailyAlphaConfig) -> Result<ScalingFit, DfaError> {
    daily_curve_and_alpha(&series.as_f64(), config, None).map(|(_, fit)| fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub mean: f64,
    pub std: f64,
    pub ci95_half_width: f64,
    pub n_days: usize,
}

/// Sample mean, sample standard deviation (n - 1) and 95% half-width.
pub fn summarize_alphas(alphas: &[f64]) -> Result<AlphaSummary, DfaError> {
    let n = alphas.len();
    if n < 2 {
        return Err(DfaError::InsufficientData(n));
    }
    let mean = alphas.iter().sum::<f64>() / n as f64;
    let var = alphas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    Ok(AlphaSummary {
        mean,
        std,
        ci95_half_width: 1.96 * std / (n as f64).sqrt(),
        n_days: n,
    })
}
