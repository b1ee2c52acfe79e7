mod common;

use proptest::prelude::*;

use lobscale::book::{replay_day, BookState, EventKind, ReplayConfig};
use lobscale::dfa::{default_scales, fit_alpha, fluctuation, DfaOptions, FitRange};
use lobscale::econ::{correlate, realized_variance, RvConfig};
use lobscale::ingest::{
    apply_session_filter, decode_binary_log, encode_binary_log, parse_csv_log, write_csv_log,
    EventRecord, EventType, SessionWindow,
};
use lobscale::book::MidPoint;
use lobscale::synth::{rng_from_seed, white_noise};

use common::random_valid_stream;

#[test]
fn random_streams_keep_book_invariants() {
    let events = random_valid_stream(100_000, 5);
    let cfg = ReplayConfig::default();
    let mut book = BookState::new();
    let mut violations = 0;
    for e in &events {
        book.apply_event(e, &cfg).unwrap();
        if book.check_invariants().is_err() {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
    let replay = replay_day(&events, &cfg).unwrap();
    let adds = events.iter().filter(|e| e.event_type == EventType::Add).count();
    assert_eq!(replay.count(EventKind::Order), adds);
    for e in &replay.events {
        if let Some(l) = e.lifetime_ms {
            assert!(l <= events.last().unwrap().timestamp - events[0].timestamp);
        }
    }
}

fn window() -> impl Strategy<Value = SessionWindow> {
    (0u32..40_000_000, 0u32..4_000_000, 1u32..40_000_000).prop_map(|(open, trim, span)| SessionWindow {
        open,
        close: open + 2 * trim + span,
        trim,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn session_filter_bounds_and_idempotence(
        mut ts in prop::collection::vec(0u32..86_400_000, 0..300),
        w in window(),
    ) {
        ts.sort_unstable();
        let events: Vec<EventRecord> = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| EventRecord::new(t, EventType::Add, i as u64 + 1, lobscale::ingest::Side::Bid, 100, 1))
            .collect();
        let once = apply_session_filter(&events, &w);
        prop_assert!(once.iter().all(|e| w.start() <= e.timestamp && e.timestamp < w.end()));
        prop_assert_eq!(once.len(), ts.iter().filter(|&&t| w.contains(t)).count());
        prop_assert_eq!(apply_session_filter(&once, &w), once);
    }

    #[test]
    fn binary_and_csv_round_trip(seed in any::<u64>(), n in 0usize..400) {
        let events = random_valid_stream(n, seed);
        let bin = encode_binary_log(&events);
        prop_assert_eq!(bin.len(), 8 + 22 * n);
        prop_assert_eq!(&decode_binary_log(&bin).unwrap(), &events);
        let mut csv = Vec::new();
        write_csv_log(&mut csv, &events).unwrap();
        let parsed = parse_csv_log(csv.as_slice()).unwrap();
        prop_assert_eq!(&parsed, &events);
        prop_assert_eq!(decode_binary_log(&encode_binary_log(&parsed)).unwrap(), parsed);
    }

    #[test]
    fn dfa_shift_and_scale(seed in any::<u64>(), a in -50.0f64..50.0, b in -1e3f64..1e3) {
        prop_assume!(a.abs() > 1e-3);
        let x = white_noise(600, &mut rng_from_seed(seed));
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let scales = default_scales(600);
        let opts = DfaOptions::default();
        let fx = fluctuation(&x, &scales, &opts).unwrap();
        let fy = fluctuation(&y, &scales, &opts).unwrap();
        for (u, v) in fx.fluctuations.iter().zip(&fy.fluctuations) {
            prop_assert!((v - a.abs() * u).abs() <= 1e-9 * v);
        }
        let ax = fit_alpha(&fx, FitRange::ALL, false).unwrap().alpha;
        let ay = fit_alpha(&fy, FitRange::ALL, false).unwrap().alpha;
        prop_assert!((ax - ay).abs() < 1e-9);
    }

    #[test]
    fn correlation_affine_invariance(seed in any::<u64>(), a in -10.0f64..10.0, b in -100.0f64..100.0) {
        prop_assume!(a.abs() > 1e-3);
        let mut rng = rng_from_seed(seed);
        let x = white_noise(50, &mut rng);
        let y: Vec<f64> = x.iter().zip(white_noise(50, &mut rng)).map(|(u, v)| u + v).collect();
        let xs: Vec<Option<f64>> = x.iter().map(|v| Some(*v)).collect();
        let ys: Vec<Option<f64>> = y.iter().map(|v| Some(*v)).collect();
        let ts: Vec<Option<f64>> = x.iter().map(|v| Some(a * v + b)).collect();
        let r = correlate(&xs, &ys).unwrap();
        let r2 = correlate(&ts, &ys).unwrap();
        prop_assert!((r2.r - a.signum() * r.r).abs() < 1e-12);
        prop_assert_eq!(r.significant_99, r.r.abs() > r.r_critical);
    }

    #[test]
    fn realized_variance_price_scale(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut rng = rng_from_seed(seed);
        let open = 27_000_000u32;
        let steps = white_noise(500, &mut rng);
        let mut p = 100.0f64;
        let path: Vec<MidPoint> = steps
            .iter()
            .enumerate()
            .map(|(i, z)| {
                p *= (0.001 * z).exp();
                MidPoint { timestamp: open + 54_000 * i as u32, mid: Some(p) }
            })
            .collect();
        let scaled: Vec<MidPoint> = path.iter().map(|m| MidPoint { mid: m.mid.map(|v| v * c), ..*m }).collect();
        let a = realized_variance(&path, open, open + 27_000_000, &RvConfig::default()).unwrap();
        let b = realized_variance(&scaled, open, open + 27_000_000, &RvConfig::default()).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }
}
