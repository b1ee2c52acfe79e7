#![allow(dead_code)]

use rand::Rng;

use lobscale::book::{BookState, ReplayConfig};
use lobscale::ingest::{EventRecord, EventType, Side};
use lobscale::synth::rng_from_seed;

/// A random stream that is valid by construction: every event is checked
/// against a live book before it is kept.
pub fn random_valid_stream(n: usize, seed: u64) -> Vec<EventRecord> {
    let mut rng = rng_from_seed(seed);
    let mut book = BookState::new();
    let cfg = ReplayConfig::default();
    let mut live: Vec<u64> = Vec::new();
    let mut next_id = 1u64;
    let mut t = 25_000_000u32;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        t += rng.random_range(0..=40);
        let add_prob = if live.len() < 300 { 0.45 } else { 0.1 };
        let ev = if live.is_empty() || rng.random_bool(add_prob) {
            let side = if rng.random_bool(0.5) { Side::Bid } else { Side::Ask };
            let price = match (side, book.best(side.opposite())) {
                (Side::Bid, Some(a)) => a.saturating_sub(rng.random_range(1..=10)).max(1),
                (Side::Ask, Some(b)) => b + rng.random_range(1..=10),
                (Side::Bid, None) => rng.random_range(990..=1000),
                (Side::Ask, None) => rng.random_range(1001..=1010),
            };
            if side == Side::Bid && book.best_ask() == Some(price) {
                continue;
            }
            let id = next_id;
            next_id += 1;
            live.push(id);
            EventRecord::new(t, EventType::Add, id, side, price, rng.random_range(1..=500))
        } else {
            let k = rng.random_range(0..live.len());
            let id = live[k];
            let order = *book.live_order(id).unwrap();
            let roll: f64 = rng.random();
            let qty = if rng.random_bool(0.5) {
                order.remaining
            } else {
                rng.random_range(1..=order.remaining)
            };
            let (ty, qty) = if roll < 0.4 {
                (EventType::Execute, qty)
            } else if roll < 0.85 {
                (EventType::Cancel, qty)
            } else {
                (EventType::Delete, if rng.random_bool(0.5) { 0 } else { order.remaining })
            };
            EventRecord::new(t, ty, id, order.side, order.price, qty)
        };
        book.apply_event(&ev, &cfg).expect("generator keeps the stream valid");
        live.retain(|id| book.live_order(*id).is_some());
        out.push(ev);
    }
    out
}
