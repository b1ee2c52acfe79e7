//! Limit-order-book duration scaling analysis.
//!
//! Event logs are replayed through an order book, turned into per-day
//! duration series, and analysed with detrended fluctuation analysis.

pub mod book;
pub mod dfa;
pub mod durations;
pub mod econ;
pub mod ingest;
pub mod report;
pub mod synth;
