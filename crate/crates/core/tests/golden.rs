//! Hand-traced fixtures for replay, durations and daily economics.

use lobscale::book::{replay_day, ClassifiedEvent, EventKind, MidPoint, ReplayConfig};
use lobscale::durations::{concat_days, extract, DurationConfig, DurationSeries, Variable};
use lobscale::econ::{daily_economics, RvConfig};
use lobscale::ingest::{EventRecord, EventType, SessionWindow, Side};

const T0: u32 = 34_200_000;

fn ev(t: u32, ty: EventType, id: u64, side: Side, price: u32, qty: u32) -> EventRecord {
    EventRecord::new(t, ty, id, side, price, qty)
}

fn six_events() -> Vec<EventRecord> {
    use EventType::*;
    use Side::*;
    vec![
        ev(T0, Add, 1, Bid, 100, 50),
        ev(T0 + 100, Add, 2, Ask, 102, 30),
        ev(T0 + 250, Execute, 2, Ask, 102, 10),
        ev(T0 + 400, Cancel, 1, Bid, 100, 50),
        ev(T0 + 400, Add, 3, Bid, 101, 20),
        ev(T0 + 900, Add, 4, Ask, 102, 5),
    ]
}

#[allow(clippy::too_many_arguments)]
fn ce(t: u32, kind: EventKind, side: Side, at_best: bool, id: u64, price: u32, qty: u32, life: Option<u32>) -> ClassifiedEvent {
    ClassifiedEvent {
        timestamp: t,
        kind,
        side,
        at_best,
        order_id: id,
        price,
        quantity: qty,
        lifetime_ms: life,
    }
}

#[test]
fn six_event_replay() {
    use EventKind::*;
    use Side::*;
    let replay = replay_day(&six_events(), &ReplayConfig::default()).unwrap();
    // 1: empty bid ladder, not at best
    // 2: empty ask ladder, not at best
    // 3: order 2 rests at the best ask 102; 250 - 100 = 150 ms
    // 4: order 1 is the best bid 100; 400 - 0 = 400 ms
    // 5: bid ladder is empty again before the add
    // 6: joins the best ask 102
    let expected = vec![
        ce(T0, Order, Bid, false, 1, 100, 50, None),
        ce(T0 + 100, Order, Ask, false, 2, 102, 30, None),
        ce(T0 + 250, Trade, Ask, true, 2, 102, 10, Some(150)),
        ce(T0 + 400, Cancel, Bid, true, 1, 100, 50, Some(400)),
        ce(T0 + 400, Order, Bid, false, 3, 101, 20, None),
        ce(T0 + 900, Order, Ask, true, 4, 102, 5, None),
    ];
    assert_eq!(replay.events, expected);
    // mid: none, 101, (unchanged), none then 101.5 at the same millisecond
    assert_eq!(
        replay.mids,
        vec![
            MidPoint { timestamp: T0, mid: None },
            MidPoint { timestamp: T0 + 100, mid: Some(101.0) },
            MidPoint { timestamp: T0 + 400, mid: Some(101.5) },
        ]
    );
}

#[test]
fn six_event_durations() {
    let replay = replay_day(&six_events(), &ReplayConfig::default()).unwrap();
    let cfg = DurationConfig::default();
    let get = |v: Variable, s: Side| extract("X", 1, &replay.events, v, s, &cfg).values;
    assert_eq!(get(Variable::OrOr, Side::Bid), vec![400]);
    assert_eq!(get(Variable::OrOr, Side::Ask), vec![800]);
    assert_eq!(get(Variable::TrTr, Side::Ask), Vec::<u32>::new());
    assert_eq!(get(Variable::OrTr, Side::Ask), vec![150]);
    assert_eq!(get(Variable::OrCa, Side::Bid), vec![400]);
    assert_eq!(get(Variable::CaCa, Side::Bid), Vec::<u32>::new());
}

#[test]
fn two_day_concatenation() {
    let day = |d: u32, v: Vec<u32>| DurationSeries {
        stock_id: "X".into(),
        day: d,
        side: Side::Ask,
        variable: Variable::TrTr,
        values: v,
    };
    let joined = concat_days(&[day(20100601, vec![5, 0, 7]), day(20100602, vec![11, 2])]).unwrap();
    // no overnight gap is inserted between 7 and 11
    assert_eq!(joined.values, vec![5, 0, 7, 11, 2]);
    assert_eq!(joined.day, 20100601);
    let mut other = day(20100603, vec![1]);
    other.side = Side::Bid;
    assert!(concat_days(&[day(20100601, vec![1]), other]).is_err());
}

#[test]
fn golden_daily_econ() {
    use EventType::*;
    use Side::*;
    let o = 36_000_000;
    let s = |sec: u32| o + sec * 1000;
    let events = vec![
        ev(s(0), Add, 1, Bid, 100, 100),
        ev(s(0), Add, 2, Ask, 102, 100),
        ev(s(200), Add, 3, Bid, 101, 50),
        ev(s(500), Cancel, 3, Bid, 101, 50),
        ev(s(700), Add, 4, Ask, 101, 40),
    ];
    let replay = replay_day(&events, &ReplayConfig::default()).unwrap();
    let session = SessionWindow { open: o, close: o + 1_200_000, trim: 0 };
    let series = extract("X", 20100601, &replay.events, Variable::OrOr, Ask, &DurationConfig::default());
    assert_eq!(series.values, vec![700_000]);
    let rv = RvConfig { grid_seconds: 300, n_offsets: 2 };
    let e = daily_economics(&series, &replay.events, &replay.mids, &session, &DurationConfig::default(), &rv).unwrap();

    // mids: 101 from 0 s, 101.5 from 200 s, 101 from 500 s, 100.5 from 700 s
    // grid at 0/300/600/900/1200 s: 101, 101.5, 101, 100.5, 100.5
    let g0 = (101.5f64 / 101.0).ln().powi(2) + (101.0f64 / 101.5).ln().powi(2) + (100.5f64 / 101.0).ln().powi(2);
    // grid at 150/450/750/1050 s: 101, 101.5, 100.5, 100.5
    let g1 = (101.5f64 / 101.0).ln().powi(2) + (100.5f64 / 101.5).ln().powi(2);
    assert_eq!(e.activity, 1);
    assert_eq!(e.avg_duration_ms, 700_000.0);
    // ask orders of 100 and 40 shares
    assert_eq!(e.avg_quantity, 70.0);
    assert!((e.daily_log_return.unwrap() - (100.5f64 / 101.0).ln()).abs() < 1e-15);
    assert!((e.realized_variance.unwrap() - (g0 + g1) / 2.0).abs() < 1e-15);
}
