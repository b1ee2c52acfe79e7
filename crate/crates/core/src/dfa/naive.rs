//! Straightforward reference DFA, kept for self-checks.
//!
//! Each window is fitted by solving the polynomial normal equations with
//! Gaussian elimination and residuals are formed explicitly. Slow, but it
//! shares no code with the projection-based implementation.

#![allow(clippy::needless_range_loop)]

use super::{DfaError, DfaOptions};

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

fn window_variance(window: &[f64], order: usize) -> f64 {
    let s = window.len();
    let half = (s as f64 - 1.0) / 2.0;
    let t: Vec<f64> = (0..s).map(|i| (i as f64 - half) / half.max(1.0)).collect();
    let dim = order + 1;
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut aty = vec![0.0; dim];
    for (ti, yi) in t.iter().zip(window) {
        for r in 0..dim {
            let pr = ti.powi(r as i32);
            aty[r] += pr * yi;
            for c in 0..dim {
                ata[r][c] += pr * ti.powi(c as i32);
            }
        }
    }
    let coef = solve(ata, aty);
    let mut sum = 0.0;
    for (ti, yi) in t.iter().zip(window) {
        let trend: f64 = coef
            .iter()
            .enumerate()
            .map(|(k, c)| c * ti.powi(k as i32))
            .sum();
        sum += (yi - trend).powi(2);
    }
    sum / s as f64
}

/// Reference `F(s)` for each scale.
pub fn fluctuation(series: &[f64], scales: &[usize], opts: &DfaOptions) -> Result<Vec<f64>, DfaError> {
    opts.validate()?;
    if series.is_empty() {
        return Err(DfaError::EmptySeries);
    }
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for x in series {
        acc += x - mean;
        profile.push(acc);
    }
    let mut out = Vec::with_capacity(scales.len());
    for &s in scales {
        if s < opts.min_scale() {
            return Err(DfaError::ScaleTooSmall {
                scale: s,
                min: opts.min_scale(),
            });
        }
        if n < 4 * s {
            return Err(DfaError::ScaleTooLarge {
                scale: s,
                len: n,
                required: 4 * s,
            });
        }
        let mut variances = Vec::new();
        for m in 0..n / s {
            variances.push(window_variance(&profile[m * s..(m + 1) * s], opts.order));
        }
        if opts.both_ends {
            for m in 0..n / s {
                variances.push(window_variance(&profile[n - (m + 1) * s..n - m * s], opts.order));
            }
        }
        out.push((variances.iter().sum::<f64>() / variances.len() as f64).sqrt());
    }
    Ok(out)
}
