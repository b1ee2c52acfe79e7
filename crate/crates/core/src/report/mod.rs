//! Run configuration, pipeline orchestration and product files.

pub mod cache;
pub mod config;
pub mod corpus;
pub mod pipeline;
pub mod validate;

use thiserror::Error;

pub use config::RunConfig;
pub use corpus::{write_corpus, CorpusSpec};
pub use pipeline::{discover_inputs, run_pipeline, Manifest, RunReport, RunStatus, PRODUCTS};
pub use validate::{validate_suite, ValidationEntry, ValidationReport};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fixed 12-significant-digit rendering used by every CSV product.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round-trip");
    if rounded == 0.0 {
        return "0".into();
    }
    let mag = rounded.abs();
    if (1e-5..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// `fmt_f64`, or an empty field for a missing value.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(0.1 + 0.2), "0.3");
        assert_eq!(fmt_f64(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_f64(-1234.5), "-1234.5");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(1.23456789012345e-9), "1.23456789012e-9");
        assert_eq!(fmt_f64(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_opt(None), "");
    }
}
