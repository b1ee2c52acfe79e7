//! Seeded self-checks of the estimator against signals with known exponents.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fmt_f64;
use crate::dfa::{default_scales, fit_alpha, fluctuation, naive, DfaOptions, FitRange};
use crate::synth::{derive_seed, generate, rng_from_seed, white_noise, GeneratorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub name: String,
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    /// `None` for informational rows that are reported but not asserted.
    pub pass: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<ValidationEntry>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass != Some(false))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<34} {:>10} {:>14} {:>10}  result", "check", "expected", "measured", "tol")?;
        for e in &self.entries {
            let result = match e.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "INFO",
            };
            writeln!(
                f,
                "{:<34} {:>10} {:>14} {:>10}  {result}{}",
                e.name,
                fmt_f64(e.expected),
                fmt_f64(e.measured),
                fmt_f64(e.tolerance),
                if e.note.is_empty() { String::new() } else { format!("  ({})", e.note) }
            )?;
        }
        Ok(())
    }
}

/// DFA-1 exponent over the default scale grid.
pub fn alpha_of(series: &[f64]) -> f64 {
    let curve = fluctuation(series, &default_scales(series.len()), &DfaOptions::default())
        .expect("validation series are long enough");
    fit_alpha(&curve, FitRange::ALL, false).expect("full-range fit").alpha
}

/// Mean exponent over `seeds` realizations of `make(seed)`.
pub fn ensemble_alpha(seeds: usize, base: u64, make: impl Fn(u64) -> GeneratorSpec + Sync) -> f64 {
    let alphas: Vec<f64> = (0..seeds as u64)
        .into_par_iter()
        .map(|i| alpha_of(&generate(&make(derive_seed(base, i))).expect("valid spec")))
        .collect();
    alphas.iter().sum::<f64>() / alphas.len() as f64
}

/// Largest relative difference between the fast and reference fluctuation
/// functions over `trials` random series.
pub fn oracle_max_relative_error(trials: usize, max_len: usize, seed: u64) -> f64 {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i));
            let n = rng.random_range(64..=max_len);
            let order = rng.random_range(1..=3);
            let opts = DfaOptions {
                order,
                both_ends: rng.random_bool(0.5),
            };
            let x = white_noise(n, &mut rng);
            let scales: Vec<usize> = (opts.min_scale()..=n / 4).collect();
            let fast = fluctuation(&x, &scales, &opts).expect("valid scales");
            let slow = naive::fluctuation(&x, &scales, &opts).expect("valid scales");
            fast.fluctuations
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

fn check(name: &str, expected: f64, measured: f64, tolerance: f64, note: &str) -> ValidationEntry {
    ValidationEntry {
        name: name.into(),
        expected,
        measured,
        tolerance,
        pass: Some((measured - expected).abs() <= tolerance),
        note: note.into(),
    }
}

/// White, integrated and fGn recovery plus reference-implementation
/// agreement, all seeded from `seed`.
pub fn validate_suite(seed: u64) -> ValidationReport {
    const N: usize = 1 << 16;
    const SEEDS: usize = 8;
    let mut entries = vec![
        check(
            "white noise alpha",
            0.5,
            ensemble_alpha(SEEDS, derive_seed(seed, 1), |s| GeneratorSpec::white(N, s)),
            0.05,
            "",
        ),
        check(
            "fGn(H=0.7) alpha",
            0.7,
            ensemble_alpha(SEEDS, derive_seed(seed, 2), |s| GeneratorSpec::fgn(0.7, N, s)),
            0.05,
            "",
        ),
        check(
            "integrated white noise alpha",
            1.5,
            ensemble_alpha(SEEDS, derive_seed(seed, 3), |s| GeneratorSpec::brownian(N, s)),
            0.05,
            "",
        ),
    ];
    let rejected = generate(&GeneratorSpec::fgn(1.0, N, seed)).is_err();
    entries.push(ValidationEntry {
        name: "fGn(H=1.0) rejected".into(),
        expected: 1.0,
        measured: rejected as u8 as f64,
        tolerance: 0.0,
        pass: Some(rejected),
        note: "H must lie in (0, 1)".into(),
    });
    let pink = ensemble_alpha(SEEDS, derive_seed(seed, 4), |s| GeneratorSpec::fgn(0.95, N, s));
    entries.push(ValidationEntry {
        name: "fGn(H=0.95) 1/f proxy".into(),
        expected: 0.95,
        measured: pink,
        tolerance: 0.05,
        pass: None,
        note: "approximation of alpha = 1, not asserted".into(),
    });
    let err = oracle_max_relative_error(20, 1024, derive_seed(seed, 5));
    entries.push(ValidationEntry {
        name: "reference DFA max rel. error".into(),
        expected: 0.0,
        measured: err,
        tolerance: 1e-10,
        pass: Some(err <= 1e-10),
        note: String::new(),
    });
    ValidationReport { entries }
}
