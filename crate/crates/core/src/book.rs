//! Limit-order-book replay.
//!
//! The book keeps full-depth ladders per side plus a registry of live orders,
//! and classifies each message into an order submission, a trade, or a
//! cancellation. The best-level flag is taken from the book as it stood
//! immediately before the message.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{EventRecord, EventType, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BookError {
    #[error("order {0} is not live")]
    UnknownOrder(u64),
    #[error("order {order_id}: quantity {requested} exceeds remaining {remaining}")]
    Overfill {
        order_id: u64,
        requested: u32,
        remaining: u32,
    },
    #[error("order {order_id}: {side} at {price} would cross the opposite best {opposite}")]
    CrossedBook {
        order_id: u64,
        side: Side,
        price: u32,
        opposite: u32,
    },
    #[error("order {0} is already live")]
    DuplicateOrder(u64),
    #[error("order {0}: zero quantity")]
    ZeroQuantity(u64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("event #{index}: {source}")]
pub struct ReplayError {
    pub index: usize,
    #[source]
    pub source: BookError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventKind {
    Order,
    Trade,
    Cancel,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Order => "ORDER",
            EventKind::Trade => "TRADE",
            EventKind::Cancel => "CANCEL",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            EventKind::Order => 0,
            EventKind::Trade => 1,
            EventKind::Cancel => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EventKind::Order),
            1 => Some(EventKind::Trade),
            2 => Some(EventKind::Cancel),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedEvent {
    pub timestamp: u32,
    pub kind: EventKind,
    pub side: Side,
    pub at_best: bool,
    pub order_id: u64,
    pub price: u32,
    /// Shares added, executed, or removed by this event.
    pub quantity: u32,
    /// Milliseconds since submission of the referenced order; `None` for ORDER.
    pub lifetime_ms: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiveOrder {
    pub side: Side,
    pub price: u32,
    pub remaining: u32,
    pub submitted_at: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayConfig {
    /// Route DELETE messages into the cancel stream.
    pub deletes_are_cancels: bool,
}

impl Default for ReplayConfig {
    fn default() -> Self {
        Self {
            deletes_are_cancels: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BookState {
    bids: BTreeMap<u32, u64>,
    asks: BTreeMap<u32, u64>,
    live: HashMap<u64, LiveOrder>,
}

impl BookState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn best_bid(&self) -> Option<u32> {
        self.bids.keys().next_back().copied()
    }

    pub fn best_ask(&self) -> Option<u32> {
        self.asks.keys().next().copied()
    }

    pub fn best(&self, side: Side) -> Option<u32> {
        match side {
            Side::Bid => self.best_bid(),
            Side::Ask => self.best_ask(),
        }
    }

    /// Mid-price in ticks, present only when both sides are populated.
    pub fn mid(&self) -> Option<f64> {
        Some((self.best_bid()? as f64 + self.best_ask()? as f64) / 2.0)
    }

    pub fn ladder(&self, side: Side) -> &BTreeMap<u32, u64> {
        match side {
            Side::Bid => &self.bids,
            Side::Ask => &self.asks,
        }
    }

    pub fn live_order(&self, order_id: u64) -> Option<&LiveOrder> {
        self.live.get(&order_id)
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn live_orders(&self) -> impl Iterator<Item = (u64, &LiveOrder)> {
        self.live.iter().map(|(id, o)| (*id, o))
    }

    fn ladder_mut(&mut self, side: Side) -> &mut BTreeMap<u32, u64> {
        match side {
            Side::Bid => &mut self.bids,
            Side::Ask => &mut self.asks,
        }
    }

    fn reduce_level(&mut self, side: Side, price: u32, quantity: u32) {
        let ladder = self.ladder_mut(side);
        if let Some(level) = ladder.get_mut(&price) {
            *level -= quantity as u64;
            if *level == 0 {
                ladder.remove(&price);
            }
        }
    }

    /// Checks an event against the book without mutating it.
    pub fn validate(&self, event: &EventRecord) -> Result<(), BookError> {
        match event.event_type {
            EventType::Add => {
                if event.quantity == 0 {
                    return Err(BookError::ZeroQuantity(event.order_id));
                }
                if self.live.contains_key(&event.order_id) {
                    return Err(BookError::DuplicateOrder(event.order_id));
                }
                let opposite = self.best(event.side.opposite());
                let crosses = match (event.side, opposite) {
                    (Side::Bid, Some(ask)) => event.price >= ask,
                    (Side::Ask, Some(bid)) => event.price <= bid,
                    _ => false,
                };
                if crosses {
                    return Err(BookError::CrossedBook {
                        order_id: event.order_id,
                        side: event.side,
                        price: event.price,
                        opposite: opposite.unwrap_or_default(),
                    });
                }
            }
            EventType::Execute | EventType::Cancel => {
                let order = self
                    .live
                    .get(&event.order_id)
                    .ok_or(BookError::UnknownOrder(event.order_id))?;
                if event.quantity == 0 {
                    return Err(BookError::ZeroQuantity(event.order_id));
                }
                if event.quantity > order.remaining {
                    return Err(BookError::Overfill {
                        order_id: event.order_id,
                        requested: event.quantity,
                        remaining: order.remaining,
                    });
                }
            }
            EventType::Delete => {
                if !self.live.contains_key(&event.order_id) {
                    return Err(BookError::UnknownOrder(event.order_id));
                }
            }
        }
        Ok(())
    }

    /// Apply one message. On error the book is left unchanged.
    ///
    /// The side and price of EXECUTE/CANCEL/DELETE are taken from the live
    /// order, not from the message.
    pub fn apply_event(
        &mut self,
        event: &EventRecord,
        config: &ReplayConfig,
    ) -> Result<Option<ClassifiedEvent>, BookError> {
        self.validate(event)?;
        let classified = match event.event_type {
            EventType::Add => {
                let at_best = self.best(event.side) == Some(event.price);
                *self.ladder_mut(event.side).entry(event.price).or_insert(0) +=
                    event.quantity as u64;
                self.live.insert(
                    event.order_id,
                    LiveOrder {
                        side: event.side,
                        price: event.price,
                        remaining: event.quantity,
                        submitted_at: event.timestamp,
                    },
                );
                Some(ClassifiedEvent {
                    timestamp: event.timestamp,
                    kind: EventKind::Order,
                    side: event.side,
                    at_best,
                    order_id: event.order_id,
                    price: event.price,
                    quantity: event.quantity,
                    lifetime_ms: None,
                })
            }
            EventType::Execute | EventType::Cancel | EventType::Delete => {
                let order = self.live[&event.order_id];
                let at_best = self.best(order.side) == Some(order.price);
                let quantity = if event.event_type == EventType::Delete {
                    order.remaining
                } else {
                    event.quantity
                };
                self.reduce_level(order.side, order.price, quantity);
                if quantity == order.remaining {
                    self.live.remove(&event.order_id);
                } else if let Some(o) = self.live.get_mut(&event.order_id) {
                    o.remaining -= quantity;
                }
                let kind = match event.event_type {
                    EventType::Execute => Some(EventKind::Trade),
                    EventType::Cancel => Some(EventKind::Cancel),
                    _ if config.deletes_are_cancels => Some(EventKind::Cancel),
                    _ => None,
                };
                kind.map(|kind| ClassifiedEvent {
                    timestamp: event.timestamp,
                    kind,
                    side: order.side,
                    at_best,
                    order_id: event.order_id,
                    price: order.price,
                    quantity,
                    lifetime_ms: Some(event.timestamp.saturating_sub(order.submitted_at)),
                })
            }
        };
        Ok(classified)
    }

    /// Full consistency check: ladder sums match live orders and the book is
    /// uncrossed.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut sums: [BTreeMap<u32, u64>; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (id, order) in &self.live {
            if order.remaining == 0 {
                return Err(format!("order {id} is live with zero remaining"));
            }
            *sums[order.side.code() as usize].entry(order.price).or_insert(0) +=
                order.remaining as u64;
        }
        for side in Side::BOTH {
            if &sums[side.code() as usize] != self.ladder(side) {
                return Err(format!("{side} ladder does not match live orders"));
            }
        }
        if let (Some(bid), Some(ask)) = (self.best_bid(), self.best_ask()) {
            if bid >= ask {
                return Err(format!("crossed book: bid {bid} >= ask {ask}"));
            }
        }
        Ok(())
    }

    /// Deterministic JSON-friendly view of the book.
    pub fn snapshot(&self, timestamp: u32) -> BookSnapshot {
        let level = |(price, quantity): (&u32, &u64)| PriceLevel {
            price: *price,
            quantity: *quantity,
        };
        BookSnapshot {
            timestamp,
            best_bid: self.best_bid(),
            best_ask: self.best_ask(),
            bids: self.bids.iter().rev().map(level).collect(),
            asks: self.asks.iter().map(level).collect(),
            live_orders: self.live.iter().map(|(id, o)| (*id, *o)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceLevel {
    pub price: u32,
    pub quantity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookSnapshot {
    pub timestamp: u32,
    pub best_bid: Option<u32>,
    pub best_ask: Option<u32>,
    pub bids: Vec<PriceLevel>,
    pub asks: Vec<PriceLevel>,
    pub live_orders: BTreeMap<u64, LiveOrder>,
}

/// Mid-price changes over a day. `mid` is `None` while either side is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidPoint {
    pub timestamp: u32,
    pub mid: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DayReplay {
    pub events: Vec<ClassifiedEvent>,
    pub mids: Vec<MidPoint>,
}

impl DayReplay {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Replay a session-filtered day from an empty book.
pub fn replay_day(events: &[EventRecord], config: &ReplayConfig) -> Result<DayReplay, ReplayError> {
    let mut book = BookState::new();
    let mut out = DayReplay {
        events: Vec::with_capacity(events.len()),
        mids: Vec::new(),
    };
    let mut last_mid: Option<f64> = None;
    for (index, event) in events.iter().enumerate() {
        let classified = book
            .apply_event(event, config)
            .map_err(|source| ReplayError { index, source })?;
        out.events.extend(classified);

        let mid = book.mid();
        if mid != last_mid || out.mids.is_empty() {
            match out.mids.last_mut() {
                Some(last) if last.timestamp == event.timestamp => last.mid = mid,
                _ => out.mids.push(MidPoint {
                    timestamp: event.timestamp,
                    mid,
                }),
            }
            last_mid = mid;
        }
    }
    Ok(out)
}

/// Book state after every event with `timestamp <= at`.
pub fn book_at(
    events: &[EventRecord],
    config: &ReplayConfig,
    at: u32,
) -> Result<BookState, ReplayError> {
    let mut book = BookState::new();
    for (index, event) in events.iter().enumerate().take_while(|(_, e)| e.timestamp <= at) {
        book.apply_event(event, config)
            .map_err(|source| ReplayError { index, source })?;
    }
    Ok(book)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u32, ty: EventType, id: u64, side: Side, price: u32, qty: u32) -> EventRecord {
        EventRecord::new(t, ty, id, side, price, qty)
    }

    #[test]
    fn first_order_is_not_at_best() {
        let mut book = BookState::new();
        let out = book
            .apply_event(&ev(1, EventType::Add, 1, Side::Bid, 100, 50), &ReplayConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(book.best_bid(), Some(100));
        assert_eq!(out.kind, EventKind::Order);
        assert!(!out.at_best);
        assert_eq!(out.lifetime_ms, None);
    }

    #[test]
    fn cancel_of_best_order_reports_lifetime() {
        let cfg = ReplayConfig::default();
        let mut book = BookState::new();
        book.apply_event(&ev(34_200_100, EventType::Add, 1, Side::Bid, 100, 50), &cfg)
            .unwrap();
        let out = book
            .apply_event(&ev(34_200_500, EventType::Cancel, 1, Side::Bid, 100, 50), &cfg)
            .unwrap()
            .unwrap();
        assert_eq!(out.kind, EventKind::Cancel);
        assert!(out.at_best);
        assert_eq!(out.lifetime_ms, Some(400));
        assert!(book.ladder(Side::Bid).is_empty());
        assert_eq!(book.best_bid(), None);
    }

    #[test]
    fn unknown_order_and_overfill() {
        let cfg = ReplayConfig::default();
        let mut book = BookState::new();
        assert_eq!(
            book.apply_event(&ev(1, EventType::Execute, 9, Side::Bid, 100, 1), &cfg),
            Err(BookError::UnknownOrder(9))
        );
        book.apply_event(&ev(1, EventType::Add, 1, Side::Ask, 101, 10), &cfg)
            .unwrap();
        assert_eq!(
            book.apply_event(&ev(2, EventType::Execute, 1, Side::Ask, 101, 11), &cfg),
            Err(BookError::Overfill {
                order_id: 1,
                requested: 11,
                remaining: 10
            })
        );
        book.check_invariants().unwrap();
    }

    #[test]
    fn crossing_add_is_rejected_and_book_unchanged() {
        let cfg = ReplayConfig::default();
        let mut book = BookState::new();
        book.apply_event(&ev(1, EventType::Add, 1, Side::Ask, 101, 10), &cfg)
            .unwrap();
        let err = book
            .apply_event(&ev(2, EventType::Add, 2, Side::Bid, 101, 10), &cfg)
            .unwrap_err();
        assert!(matches!(err, BookError::CrossedBook { opposite: 101, .. }));
        assert_eq!(book.best_bid(), None);
        assert_eq!(book.live_count(), 1);
    }

    #[test]
    fn partial_execution_keeps_order_live() {
        let cfg = ReplayConfig::default();
        let mut book = BookState::new();
        book.apply_event(&ev(100, EventType::Add, 1, Side::Ask, 101, 10), &cfg)
            .unwrap();
        let first = book
            .apply_event(&ev(200, EventType::Execute, 1, Side::Ask, 101, 4), &cfg)
            .unwrap()
            .unwrap();
        assert_eq!(book.ladder(Side::Ask)[&101], 6);
        let second = book
            .apply_event(&ev(500, EventType::Execute, 1, Side::Ask, 101, 6), &cfg)
            .unwrap()
            .unwrap();
        assert_eq!((first.lifetime_ms, second.lifetime_ms), (Some(100), Some(400)));
        assert!(book.live_order(1).is_none());
        assert!(book.ladder(Side::Ask).is_empty());
    }

    #[test]
    fn delete_routing_follows_config() {
        let add = ev(10, EventType::Add, 1, Side::Bid, 99, 5);
        let del = ev(30, EventType::Delete, 1, Side::Bid, 0, 0);
        let mut book = BookState::new();
        let on = ReplayConfig { deletes_are_cancels: true };
        book.apply_event(&add, &on).unwrap();
        let out = book.apply_event(&del, &on).unwrap().unwrap();
        assert_eq!((out.kind, out.quantity, out.lifetime_ms), (EventKind::Cancel, 5, Some(20)));

        let mut book = BookState::new();
        let off = ReplayConfig { deletes_are_cancels: false };
        book.apply_event(&add, &off).unwrap();
        assert_eq!(book.apply_event(&del, &off).unwrap(), None);
        assert_eq!(book.live_count(), 0);
    }

    #[test]
    fn deeper_level_becomes_best_when_top_empties() {
        let cfg = ReplayConfig::default();
        let mut book = BookState::new();
        book.apply_event(&ev(1, EventType::Add, 1, Side::Bid, 100, 5), &cfg).unwrap();
        book.apply_event(&ev(2, EventType::Add, 2, Side::Bid, 98, 5), &cfg).unwrap();
        let deep = book
            .apply_event(&ev(3, EventType::Cancel, 2, Side::Bid, 98, 5), &cfg)
            .unwrap()
            .unwrap();
        assert!(!deep.at_best);
        book.apply_event(&ev(4, EventType::Add, 3, Side::Bid, 97, 5), &cfg).unwrap();
        book.apply_event(&ev(5, EventType::Cancel, 1, Side::Bid, 100, 5), &cfg).unwrap();
        assert_eq!(book.best_bid(), Some(97));
    }

    #[test]
    fn replay_of_empty_day_is_empty() {
        let out = replay_day(&[], &ReplayConfig::default()).unwrap();
        assert!(out.events.is_empty());
        assert!(out.mids.is_empty());
    }

    #[test]
    fn replay_error_carries_index() {
        let events = [
            ev(1, EventType::Add, 1, Side::Bid, 100, 5),
            ev(2, EventType::Cancel, 2, Side::Bid, 100, 5),
        ];
        let err = replay_day(&events, &ReplayConfig::default()).unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(err.source, BookError::UnknownOrder(2));
    }

    #[test]
    fn mid_path_tracks_two_sided_book() {
        let cfg = ReplayConfig::default();
        let events = [
            ev(1, EventType::Add, 1, Side::Bid, 100, 5),
            ev(2, EventType::Add, 2, Side::Ask, 104, 5),
            ev(2, EventType::Add, 3, Side::Ask, 102, 5),
            ev(3, EventType::Add, 4, Side::Bid, 99, 5),
            ev(4, EventType::Execute, 1, Side::Bid, 100, 5),
        ];
        let replay = replay_day(&events, &cfg).unwrap();
        assert_eq!(
            replay.mids,
            vec![
                MidPoint { timestamp: 1, mid: None },
                MidPoint { timestamp: 2, mid: Some(101.0) },
                MidPoint { timestamp: 4, mid: Some(100.5) },
            ]
        );
    }

    #[test]
    fn snapshot_and_book_at() {
        let cfg = ReplayConfig::default();
        let events = [
            ev(1, EventType::Add, 1, Side::Bid, 100, 5),
            ev(2, EventType::Add, 2, Side::Bid, 100, 7),
            ev(3, EventType::Add, 3, Side::Ask, 103, 1),
            ev(9, EventType::Cancel, 1, Side::Bid, 100, 5),
        ];
        let book = book_at(&events, &cfg, 3).unwrap();
        let snap = book.snapshot(3);
        assert_eq!(snap.bids, vec![PriceLevel { price: 100, quantity: 12 }]);
        assert_eq!(snap.best_ask, Some(103));
        assert_eq!(snap.live_orders.len(), 3);
        let json = serde_json::to_string(&snap).unwrap();
        assert!(json.contains("\"best_bid\":100"));
    }
}
