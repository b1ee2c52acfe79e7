//! Detrended fluctuation analysis.
//!
//! The series is integrated into a mean-centred profile, cut into
//! non-overlapping windows of `s` samples starting at the first sample, and a
//! least-squares polynomial of the configured order is removed from each
//! window. `F(s)` is the square root of the window-averaged residual variance.
//! Samples beyond the last full window are discarded unless `both_ends` is
//! set, in which case a second partition anchored at the last sample is
//! added.

mod fit;
pub mod naive;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fit::{
    daily_alpha, daily_curve_and_alpha, fit_alpha, local_alphas, local_alphas_with, summarize_alphas, AlphaSummary, Band, BandFit,
    DailyAlphaConfig, FitBand, FitRange, LocalAlphas, ScalingFit, DAY_BAND, INTRADAY_BAND,
    MONTH_BAND,
};

pub const MAX_ORDER: usize = 3;
pub const DEFAULT_MIN_SCALE: usize = 8;
pub const DEFAULT_SCALES_PER_DECADE: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DfaError {
    #[error("empty series")]
    EmptySeries,
    #[error("scale {scale} needs at least {required} samples, series has {len}")]
    ScaleTooLarge {
        scale: usize,
        len: usize,
        required: usize,
    },
    #[error("scale {scale} is below the minimum {min} for this detrending order")]
    ScaleTooSmall { scale: usize, min: usize },
    #[error("scales must be strictly increasing and non-empty")]
    BadScales,
    #[error("detrending order {0} outside 1..=3")]
    InvalidOrder(usize),
    #[error("fit range holds {found} curve points, need at least 2")]
    InsufficientPoints { found: usize },
    #[error("fluctuation is zero inside the fit range")]
    ZeroFluctuationInRange,
    #[error("curve has no normalization constant")]
    MissingNormalization,
    #[error("series of length {len} is shorter than the minimum {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("need at least 2 values, got {0}")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaOptions {
    /// Polynomial detrending order, 1..=3.
    pub order: usize,
    /// Also partition from the end of the profile (2 * floor(N/s) windows).
    pub both_ends: bool,
}

impl Default for DfaOptions {
    fn default() -> Self {
        Self {
            order: 1,
            both_ends: false,
        }
    }
}

impl DfaOptions {
    pub fn validate(&self) -> Result<(), DfaError> {
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(DfaError::InvalidOrder(self.order));
        }
        Ok(())
    }

    pub fn min_scale(&self) -> usize {
        self.order + 2
    }
}

/// `(s, F(s))` samples. When `normalization` is set, `s / normalization` is
/// the normalized scale used by band fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationCurve {
    pub scales: Vec<usize>,
    pub fluctuations: Vec<f64>,
    pub n_source: usize,
    pub normalization: Option<f64>,
}

impl FluctuationCurve {
    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn with_normalization(mut self, average_daily_count: f64) -> Self {
        self.normalization = Some(average_daily_count);
        self
    }

    pub fn normalized_scales(&self) -> Option<Vec<f64>> {
        let a = self.normalization?;
        Some(self.scales.iter().map(|&s| s as f64 / a).collect())
    }

    /// `scale,fluctuation` rows, plus `normalized_scale` when normalized.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match self.normalization {
            Some(a) => {
                writeln!(w, "scale,normalized_scale,fluctuation")?;
                for (s, f) in self.scales.iter().zip(&self.fluctuations) {
                    writeln!(
                        w,
                        "{},{},{}",
                        s,
                        crate::report::fmt_f64(*s as f64 / a),
                        crate::report::fmt_f64(*f)
                    )?;
                }
            }
            None => {
                writeln!(w, "scale,fluctuation")?;
                for (s, f) in self.scales.iter().zip(&self.fluctuations) {
                    writeln!(w, "{},{}", s, crate::report::fmt_f64(*f))?;
                }
            }
        }
        Ok(())
    }
}

/// Cumulative sum of the mean-subtracted series.
pub fn profile(series: &[f64]) -> Result<Vec<f64>, DfaError> {
    if series.is_empty() {
        return Err(DfaError::EmptySeries);
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    let mut acc = 0.0;
    Ok(series
        .iter()
        .map(|x| {
            acc += x - mean;
            acc
        })
        .collect())
}

/// Integer scales log-spaced at `per_decade` points per decade from `min`
/// up to `max`, rounded and deduplicated.
pub fn log_spaced_scales(min: usize, max: usize, per_decade: usize) -> Vec<usize> {
    let mut scales: Vec<usize> = Vec::new();
    if min == 0 || max < min || per_decade == 0 {
        return scales;
    }
    let mut k = 0usize;
    loop {
        let s = (min as f64 * 10f64.powf(k as f64 / per_decade as f64)).round() as usize;
        if s > max {
            break;
        }
        if scales.last() != Some(&s) {
            scales.push(s);
        }
        k += 1;
    }
    scales
}

/// Default grid: 20 per decade from 8 to floor(N/4).
pub fn default_scales(n: usize) -> Vec<usize> {
    log_spaced_scales(DEFAULT_MIN_SCALE, n / 4, DEFAULT_SCALES_PER_DECADE)
}

/// Orthonormal polynomial basis of degree `order` over `s` equally spaced
/// points, built by modified Gram-Schmidt on powers of the centred index
/// scaled to [-1, 1]. Row-major: `basis[j * s + i]`.
pub(crate) fn orthonormal_basis(s: usize, order: usize) -> Vec<f64> {
    let half = (s as f64 - 1.0) / 2.0;
    let scale = if half > 0.0 { half } else { 1.0 };
    let u: Vec<f64> = (0..s).map(|i| (i as f64 - half) / scale).collect();
    let mut basis = vec![0.0; (order + 1) * s];
    for j in 0..=order {
        let mut v: Vec<f64> = u.iter().map(|x| x.powi(j as i32)).collect();
        // Two passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for k in 0..j {
                let q = &basis[k * s..(k + 1) * s];
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (dst, x) in basis[j * s..(j + 1) * s].iter_mut().zip(&v) {
            *dst = x / norm;
        }
    }
    basis
}

/// Mean squared residual of `window` after projecting out the basis.
fn window_variance(window: &[f64], basis: &[f64], order: usize, coeffs: &mut [f64]) -> f64 {
    let s = window.len();
    for (j, c) in coeffs.iter_mut().enumerate().take(order + 1) {
        let q = &basis[j * s..(j + 1) * s];
        *c = q.iter().zip(window).map(|(a, b)| a * b).sum();
    }
    let mut rss = 0.0;
    for (i, &y) in window.iter().enumerate() {
        let mut trend = 0.0;
        for (j, c) in coeffs.iter().enumerate().take(order + 1) {
            trend += c * basis[j * s + i];
        }
        let r = y - trend;
        rss += r * r;
    }
    rss / s as f64
}

fn check_scales(n: usize, scales: &[usize], opts: &DfaOptions) -> Result<(), DfaError> {
    opts.validate()?;
    if n == 0 {
        return Err(DfaError::EmptySeries);
    }
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DfaError::BadScales);
    }
    let min = opts.min_scale();
    if scales[0] < min {
        return Err(DfaError::ScaleTooSmall {
            scale: scales[0],
            min,
        });
    }
    let max = *scales.last().unwrap();
    if n < 4 * max {
        return Err(DfaError::ScaleTooLarge {
            scale: max,
            len: n,
            required: 4 * max,
        });
    }
    Ok(())
}

/// `F(s)` of an already integrated profile.
pub fn fluctuation_of_profile(profile: &[f64], s: usize, opts: &DfaOptions) -> f64 {
    let n = profile.len();
    let windows = n / s;
    let basis = orthonormal_basis(s, opts.order);
    let mut coeffs = vec![0.0; opts.order + 1];
    let mut total = 0.0;
    for m in 0..windows {
        total += window_variance(&profile[m * s..(m + 1) * s], &basis, opts.order, &mut coeffs);
    }
    let mut count = windows;
    if opts.both_ends {
        for m in 0..windows {
            let end = n - m * s;
            total += window_variance(&profile[end - s..end], &basis, opts.order, &mut coeffs);
        }
        count += windows;
    }
    (total / count as f64).sqrt()
}

/// DFA fluctuation function over `scales`.
///
/// Scales are evaluated in parallel; each scale reduces its windows in a
/// fixed order, so results do not depend on the thread count.
pub fn fluctuation(
    series: &[f64],
    scales: &[usize],
    opts: &DfaOptions,
) -> Result<FluctuationCurve, DfaError> {
    check_scales(series.len(), scales, opts)?;
    let y = profile(series)?;
    let fluctuations: Vec<f64> = scales
        .par_iter()
        .map(|&s| fluctuation_of_profile(&y, s, opts))
        .collect();
    Ok(FluctuationCurve {
        scales: scales.to_vec(),
        fluctuations,
        n_source: series.len(),
        normalization: None,
    })
}
