//! C ABI over the lobscale estimators.
//!
//! Every function returns a [`LobStatus`]. On failure a message is kept per
//! thread and can be read with [`lob_last_error`]. Curves are opaque handles
//! released with [`lob_curve_free`]. Missing values in input arrays are NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lobscale::book::MidPoint;
use lobscale::dfa::{
    self, default_scales, fit_alpha, local_alphas, Band, DfaError, DfaOptions, FitRange,
    FluctuationCurve, ScalingFit,
};
use lobscale::econ::{self, EconError, RvConfig};
use lobscale::synth::{self, GeneratorSpec, SignalKind, SynthError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InsufficientData = 3,
    ZeroVariance = 4,
    EmbeddingFailure = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobSignal {
    White = 0,
    Integrated = 1,
    Fgn = 2,
}

/// Opaque fluctuation curve.
pub struct LobCurve {
    inner: FluctuationCurve,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LobFit {
    pub alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub stderr_alpha: f64,
    pub n_points: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LobCorrelation {
    pub r: f64,
    pub r_critical: f64,
    pub n: usize,
    pub significant_99: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: LobStatus, msg: impl ToString) -> LobStatus {
    set_error(msg.to_string());
    status
}

fn dfa_status(e: DfaError) -> LobStatus {
    let status = match e {
        DfaError::InsufficientPoints { .. }
        | DfaError::InsufficientData(_)
        | DfaError::SeriesTooShort { .. }
        | DfaError::EmptySeries => LobStatus::InsufficientData,
        _ => LobStatus::InvalidArgument,
    };
    fail(status, e)
}

fn econ_status(e: EconError) -> LobStatus {
    let status = match e {
        EconError::ZeroVariance => LobStatus::ZeroVariance,
        EconError::InsufficientData(_) | EconError::InsufficientPath | EconError::EmptyDay => {
            LobStatus::InsufficientData
        }
        _ => LobStatus::InvalidArgument,
    };
    fail(status, e)
}

fn synth_status(e: SynthError) -> LobStatus {
    let status = match e {
        SynthError::EmbeddingFailure { .. } => LobStatus::EmbeddingFailure,
        _ => LobStatus::InvalidArgument,
    };
    fail(status, e)
}

/// Run `f`, converting panics into `LobStatus::Panic`.
fn guard(f: impl FnOnce() -> LobStatus) -> LobStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(LobStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize) -> Option<&'a mut [T]> {
    if len == 0 {
        Some(&mut [])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(ptr, len))
    }
}

fn to_fit(f: &ScalingFit) -> LobFit {
    LobFit {
        alpha: f.alpha,
        intercept: f.intercept,
        r_squared: f.r_squared,
        stderr_alpha: f.stderr_alpha,
        n_points: f.n_points,
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lob_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Mean-centred cumulative sum of `x` written to `out` (both length `n`).
///
/// # Safety
/// `x` and `out` must each hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn lob_profile(x: *const f64, n: usize, out: *mut f64) -> LobStatus {
    guard(|| {
        let (Some(x), Some(out)) = (slice(x, n), slice_mut(out, n)) else {
            return fail(LobStatus::NullPointer, "null array");
        };
        match dfa::profile(x) {
            Ok(p) => {
                out.copy_from_slice(&p);
                LobStatus::Ok
            }
            Err(e) => dfa_status(e),
        }
    })
}

/// DFA of `x` at the given scales, or the default grid when `n_scales` is 0.
///
/// # Safety
/// `x` must hold `n` values, `scales` `n_scales` values, and `out` must be
/// a valid pointer. The returned curve is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn lob_fluctuation(
    x: *const f64,
    n: usize,
    scales: *const usize,
    n_scales: usize,
    order: u32,
    both_ends: bool,
    out: *mut *mut LobCurve,
) -> LobStatus {
    guard(|| {
        if out.is_null() {
            return fail(LobStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let (Some(x), Some(scales)) = (slice(x, n), slice(scales, n_scales)) else {
            return fail(LobStatus::NullPointer, "null array");
        };
        let grid = if scales.is_empty() {
            default_scales(n)
        } else {
            scales.to_vec()
        };
        let opts = DfaOptions {
            order: order as usize,
            both_ends,
        };
        match dfa::fluctuation(x, &grid, &opts) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(LobCurve { inner }));
                LobStatus::Ok
            }
            Err(e) => dfa_status(e),
        }
    })
}

/// # Safety
/// `curve` must be null or a handle from `lob_fluctuation`.
#[no_mangle]
pub unsafe extern "C" fn lob_curve_len(curve: *const LobCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.inner.len())
}

/// Scale and fluctuation at position `i`.
///
/// # Safety
/// `curve` must be a live handle; `scale` and `fluctuation` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lob_curve_get(
    curve: *const LobCurve,
    i: usize,
    scale: *mut usize,
    fluctuation: *mut f64,
) -> LobStatus {
    guard(|| {
        let Some(c) = curve.as_ref() else {
            return fail(LobStatus::NullPointer, "null curve");
        };
        if scale.is_null() || fluctuation.is_null() {
            return fail(LobStatus::NullPointer, "null output");
        }
        if i >= c.inner.len() {
            return fail(LobStatus::InvalidArgument, format!("index {i} out of range"));
        }
        *scale = c.inner.scales[i];
        *fluctuation = c.inner.fluctuations[i];
        LobStatus::Ok
    })
}

/// Set the average daily event count used for normalized scales.
///
/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lob_curve_set_normalization(curve: *mut LobCurve, average: f64) -> LobStatus {
    guard(|| {
        let Some(c) = curve.as_mut() else {
            return fail(LobStatus::NullPointer, "null curve");
        };
        if !(average.is_finite() && average > 0.0) {
            return fail(LobStatus::InvalidArgument, "normalization must be positive");
        }
        c.inner.normalization = Some(average);
        LobStatus::Ok
    })
}

/// Log-log fit over scales in `(lo, hi]`; pass infinities for the full
/// curve. With `normalized`, the range applies to `s / average`.
///
/// # Safety
/// `curve` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lob_curve_fit(
    curve: *const LobCurve,
    lo: f64,
    hi: f64,
    normalized: bool,
    out: *mut LobFit,
) -> LobStatus {
    guard(|| {
        let (Some(c), Some(out)) = (curve.as_ref(), out.as_mut()) else {
            return fail(LobStatus::NullPointer, "null pointer");
        };
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return fail(LobStatus::InvalidArgument, "fit range must satisfy lo < hi");
        }
        match fit_alpha(&c.inner, FitRange::new(lo, hi), normalized) {
            Ok(f) => {
                *out = to_fit(&f);
                LobStatus::Ok
            }
            Err(e) => dfa_status(e),
        }
    })
}

/// The three band exponents of a normalized curve. `status[k]` reports
/// band `k` separately; the return value only covers argument errors.
///
/// # Safety
/// `curve` must be a live handle; `fits` and `status` must hold 3 entries.
#[no_mangle]
pub unsafe extern "C" fn lob_curve_local_alphas(
    curve: *const LobCurve,
    fits: *mut LobFit,
    status: *mut LobStatus,
) -> LobStatus {
    guard(|| {
        let Some(c) = curve.as_ref() else {
            return fail(LobStatus::NullPointer, "null curve");
        };
        let (Some(fits), Some(status)) = (slice_mut(fits, 3), slice_mut(status, 3)) else {
            return fail(LobStatus::NullPointer, "null output");
        };
        let local = match local_alphas(&c.inner) {
            Ok(l) => l,
            Err(e) => return dfa_status(e),
        };
        for band in Band::ALL {
            let k = band as usize;
            match local.get(band) {
                Ok(f) => {
                    fits[k] = to_fit(f);
                    status[k] = LobStatus::Ok;
                }
                Err(e) => {
                    fits[k] = LobFit::default();
                    status[k] = dfa_status(e.clone());
                }
            }
        }
        LobStatus::Ok
    })
}

/// # Safety
/// `curve` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lob_curve_free(curve: *mut LobCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Fill `out` with `n` samples of a seeded test signal; `kind` is a
/// `LobSignal` value.
///
/// # Safety
/// `out` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn lob_generate(
    kind: u32,
    hurst: f64,
    n: usize,
    seed: u64,
    out: *mut f64,
) -> LobStatus {
    guard(|| {
        let Some(out) = slice_mut(out, n) else {
            return fail(LobStatus::NullPointer, "null output");
        };
        let kind = match kind {
            k if k == LobSignal::White as u32 => SignalKind::White,
            k if k == LobSignal::Integrated as u32 => SignalKind::BrownianIncrementsIntegrated,
            k if k == LobSignal::Fgn as u32 => SignalKind::Fgn,
            other => return fail(LobStatus::InvalidArgument, format!("unknown signal kind {other}")),
        };
        match synth::generate(&GeneratorSpec {
            kind,
            hurst,
            length: n,
            seed,
        }) {
            Ok(x) => {
                out.copy_from_slice(&x);
                LobStatus::Ok
            }
            Err(e) => synth_status(e),
        }
    })
}

/// Sub-sampled realized variance of a mid-price path. `times` must be
/// non-decreasing; a NaN mid marks a one-sided book.
///
/// # Safety
/// `times` and `mids` must hold `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lob_realized_variance(
    times: *const u32,
    mids: *const f64,
    n: usize,
    start: u32,
    end: u32,
    grid_seconds: u32,
    n_offsets: u32,
    out: *mut f64,
) -> LobStatus {
    guard(|| {
        let (Some(times), Some(mids), Some(out)) = (slice(times, n), slice(mids, n), out.as_mut()) else {
            return fail(LobStatus::NullPointer, "null pointer");
        };
        if times.windows(2).any(|w| w[1] < w[0]) {
            return fail(LobStatus::InvalidArgument, "times must be non-decreasing");
        }
        let path: Vec<MidPoint> = times
            .iter()
            .zip(mids)
            .map(|(&timestamp, &m)| MidPoint {
                timestamp,
                mid: (!m.is_nan()).then_some(m),
            })
            .collect();
        let cfg = RvConfig {
            grid_seconds,
            n_offsets,
        };
        match econ::realized_variance(&path, start, end, &cfg) {
            Ok(v) => {
                *out = v;
                LobStatus::Ok
            }
            Err(e) => econ_status(e),
        }
    })
}

/// Pearson correlation with the two-sided 1% test; NaN pairs are dropped.
///
/// # Safety
/// `x` and `y` must hold `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lob_correlate(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut LobCorrelation,
) -> LobStatus {
    guard(|| {
        let (Some(x), Some(y), Some(out)) = (slice(x, n), slice(y, n), out.as_mut()) else {
            return fail(LobStatus::NullPointer, "null pointer");
        };
        let opt = |v: &[f64]| -> Vec<Option<f64>> { v.iter().map(|a| (!a.is_nan()).then_some(*a)).collect() };
        match econ::correlate(&opt(x), &opt(y)) {
            Ok(c) => {
                *out = LobCorrelation {
                    r: c.r,
                    r_critical: c.r_critical,
                    n: c.n,
                    significant_99: c.significant_99,
                };
                LobStatus::Ok
            }
            Err(e) => econ_status(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn null_pointers_are_reported() {
        let st = unsafe { lob_profile(ptr::null(), 4, ptr::null_mut()) };
        assert_eq!(st, LobStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(lob_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "null array");
    }

    #[test]
    fn success_clears_error() {
        unsafe { lob_profile(ptr::null(), 4, ptr::null_mut()) };
        let x = [1.0, 2.0, 3.0];
        let mut out = [0.0; 3];
        let st = unsafe { lob_profile(x.as_ptr(), 3, out.as_mut_ptr()) };
        assert_eq!(st, LobStatus::Ok);
        assert_eq!(out, [-1.0, -1.0, 0.0]);
        assert!(lob_last_error().is_null());
    }

    #[test]
    fn free_null_is_noop() {
        unsafe { lob_curve_free(ptr::null_mut()) };
    }
}
