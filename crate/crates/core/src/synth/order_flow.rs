//! Synthetic one-day event streams whose duration series for a chosen
//! variable is prescribed.
//!
//! Target events (orders, trades or cancels on one side) are placed at the
//! cumulative sums of the requested durations. Background activity on both
//! sides keeps the book populated and moves the mid-price, but never produces
//! an event of the target kind on the target side. Every emitted message is
//! applied to a [`BookState`] as it is generated, so the stream always
//! replays cleanly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::{rng_from_seed, FgnGenerator, GeneratorSpec, SignalKind, SynthError};
use crate::book::{BookState, EventKind, ReplayConfig};
use crate::durations::Variable;
use crate::ingest::{EventRecord, EventType, SessionWindow, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DurationSource {
    /// I.i.d. exponential durations.
    Exponential { mean_ms: f64 },
    /// `mean * exp(sigma * x - sigma^2 / 2)` for a unit-variance Gaussian
    /// signal `x` (white or fGn).
    LogGaussian {
        signal: SignalKind,
        hurst: f64,
        mean_ms: f64,
        sigma: f64,
    },
}

impl DurationSource {
    fn mean_ms(&self) -> f64 {
        match *self {
            DurationSource::Exponential { mean_ms } => mean_ms,
            DurationSource::LogGaussian { mean_ms, .. } => mean_ms,
        }
    }

    /// Millisecond durations, rounded last.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<u32>, SynthError> {
        let to_ms = |d: f64| d.round().max(0.0) as u32;
        match *self {
            DurationSource::Exponential { mean_ms } => {
                let exp = Exp::new(1.0 / mean_ms)
                    .map_err(|e| SynthError::InvalidShapeParams(format!("exponential mean: {e}")))?;
                Ok((0..n).map(|_| to_ms(exp.sample(rng))).collect())
            }
            DurationSource::LogGaussian {
                signal,
                hurst,
                mean_ms,
                sigma,
            } => {
                let x = match signal {
                    SignalKind::White => super::white_noise(n, rng),
                    SignalKind::Fgn => {
                        GeneratorSpec::fgn(hurst, n.max(2), 0).validate()?;
                        FgnGenerator::new(hurst, n.max(2))?.sample(rng)
                    }
                    SignalKind::BrownianIncrementsIntegrated => {
                        return Err(SynthError::InvalidShapeParams(
                            "integrated signals are not stationary duration drivers".into(),
                        ))
                    }
                };
                Ok(x.iter()
                    .take(n)
                    .map(|v| to_ms(mean_ms * (sigma * v - 0.5 * sigma * sigma).exp()))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFlowSpec {
    /// Inter-event variable whose series is prescribed: or-or, tr-tr or ca-ca.
    pub target: Variable,
    pub side: Side,
    /// Number of durations, i.e. target events minus one.
    pub n_durations: usize,
    pub durations: DurationSource,
    pub session: SessionWindow,
    pub base_price: u32,
    /// Price levels seeded on each side at the session start.
    pub depth_levels: u32,
    pub orders_per_level: u32,
    /// Background messages per target event.
    pub background_ratio: f64,
    /// Live-order cap per side for background additions.
    pub max_live_per_side: usize,
}

impl Default for OrderFlowSpec {
    fn default() -> Self {
        Self {
            target: Variable::TrTr,
            side: Side::Bid,
            n_durations: 2000,
            durations: DurationSource::Exponential { mean_ms: 5000.0 },
            session: SessionWindow {
                open: 7 * 3_600_000,
                close: 15 * 3_600_000 + 1_800_000,
                trim: SessionWindow::DEFAULT_TRIM_MS,
            },
            base_price: 10_000,
            depth_levels: 5,
            orders_per_level: 3,
            background_ratio: 2.0,
            max_live_per_side: 120,
        }
    }
}

impl OrderFlowSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidShapeParams(m));
        if self.target.is_lifetime() {
            return bad(format!("target {} must be an inter-event variable", self.target));
        }
        if self.n_durations == 0 {
            return bad("n_durations must be positive".into());
        }
        if self.durations.mean_ms().is_nan() || self.durations.mean_ms() <= 0.0 {
            return bad("mean duration must be positive".into());
        }
        if let DurationSource::LogGaussian { sigma, .. } = self.durations {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return bad(format!("sigma {sigma} must be finite and nonnegative"));
            }
        }
        if self.depth_levels == 0 || self.orders_per_level == 0 {
            return bad("book must be seeded with at least one order per side".into());
        }
        if self.base_price <= self.depth_levels + 10 {
            return bad("base price too small for the seeded depth".into());
        }
        if !(self.background_ratio >= 0.0 && self.background_ratio.is_finite()) {
            return bad("background ratio must be finite and nonnegative".into());
        }
        if self.max_live_per_side < 4 {
            return bad("max_live_per_side must be at least 4".into());
        }
        self.session
            .validate()
            .map_err(SynthError::InvalidShapeParams)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDay {
    pub events: Vec<EventRecord>,
    /// The prescribed durations, as the replayed series should reproduce them.
    pub durations: Vec<u32>,
}

const MIN_BACKGROUND_DEPTH: usize = 3;

struct FlowBuilder<'a> {
    spec: &'a OrderFlowSpec,
    book: BookState,
    replay: ReplayConfig,
    live: [Vec<u64>; 2],
    next_id: u64,
    events: Vec<EventRecord>,
}

impl<'a> FlowBuilder<'a> {
    fn new(spec: &'a OrderFlowSpec) -> Self {
        Self {
            spec,
            book: BookState::new(),
            replay: ReplayConfig::default(),
            live: [Vec::new(), Vec::new()],
            next_id: 1,
            events: Vec::new(),
        }
    }

    fn emit(&mut self, event: EventRecord) {
        self.book
            .apply_event(&event, &self.replay)
            .expect("generator produced an invalid event");
        let ids = &mut self.live[event.side.code() as usize];
        if event.event_type == EventType::Add {
            ids.push(event.order_id);
        } else if self.book.live_order(event.order_id).is_none() {
            if let Some(pos) = ids.iter().position(|&id| id == event.order_id) {
                ids.remove(pos);
            }
        }
        self.events.push(event);
    }

    fn live_on(&self, side: Side) -> usize {
        self.live[side.code() as usize].len()
    }

    fn quantity(rng: &mut ChaCha8Rng) -> u32 {
        100 * rng.random_range(1..=10)
    }

    fn add_price(&self, side: Side, rng: &mut ChaCha8Rng) -> u32 {
        let base = self.spec.base_price;
        match (self.book.best(side), self.book.best(side.opposite())) {
            (Some(own), Some(opp)) => {
                let spread = opp.abs_diff(own);
                if spread >= 2 && rng.random_bool(0.15) {
                    match side {
                        Side::Bid => own + 1,
                        Side::Ask => own - 1,
                    }
                } else {
                    let k = rng.random_range(0..=3);
                    match side {
                        Side::Bid => own.saturating_sub(k).max(1),
                        Side::Ask => own + k,
                    }
                }
            }
            (Some(own), None) => {
                let k = rng.random_range(0..=3);
                match side {
                    Side::Bid => own.saturating_sub(k).max(1),
                    Side::Ask => own + k,
                }
            }
            (None, Some(opp)) => {
                let k = rng.random_range(1..=3);
                match side {
                    Side::Bid => opp.saturating_sub(k).max(1),
                    Side::Ask => opp + k,
                }
            }
            (None, None) => match side {
                Side::Bid => base,
                Side::Ask => base + 1,
            },
        }
    }

    fn add(&mut self, t: u32, side: Side, rng: &mut ChaCha8Rng) -> u64 {
        let price = self.add_price(side, rng);
        let id = self.next_id;
        self.next_id += 1;
        let qty = Self::quantity(rng);
        self.emit(EventRecord::new(t, EventType::Add, id, side, price, qty));
        id
    }

    /// Oldest live order at the best price of `side`.
    fn best_order(&self, side: Side) -> Option<u64> {
        let best = self.book.best(side)?;
        self.live[side.code() as usize]
            .iter()
            .copied()
            .find(|id| self.book.live_order(*id).is_some_and(|o| o.price == best))
    }

    fn random_order(&self, side: Side, rng: &mut ChaCha8Rng) -> Option<u64> {
        let ids = &self.live[side.code() as usize];
        if ids.is_empty() {
            None
        } else {
            Some(ids[rng.random_range(0..ids.len())])
        }
    }

    fn remove(&mut self, t: u32, ty: EventType, id: u64, partial: bool, rng: &mut ChaCha8Rng) {
        let order = *self.book.live_order(id).expect("live order");
        let qty = if partial && order.remaining > 1 && rng.random_bool(0.3) {
            rng.random_range(1..order.remaining)
        } else {
            order.remaining
        };
        self.emit(EventRecord::new(t, ty, id, order.side, order.price, qty));
    }

    fn seed_book(&mut self, t: u32, rng: &mut ChaCha8Rng) {
        let spec = self.spec;
        for side in Side::BOTH {
            if spec.target == Variable::OrOr && side == spec.side {
                continue;
            }
            for level in 0..spec.depth_levels {
                let price = match side {
                    Side::Bid => spec.base_price - level,
                    Side::Ask => spec.base_price + 1 + level,
                };
                for _ in 0..spec.orders_per_level {
                    let id = self.next_id;
                    self.next_id += 1;
                    let qty = Self::quantity(rng);
                    self.emit(EventRecord::new(t, EventType::Add, id, side, price, qty));
                }
            }
        }
    }

    fn target_event(&mut self, t: u32, rng: &mut ChaCha8Rng) {
        let side = self.spec.side;
        match self.spec.target.kind() {
            EventKind::Order => {
                self.add(t, side, rng);
            }
            EventKind::Trade => {
                let id = match self.best_order(side) {
                    Some(id) => id,
                    None => self.add(t, side, rng),
                };
                self.remove(t, EventType::Execute, id, true, rng);
            }
            EventKind::Cancel => {
                let id = match self.best_order(side) {
                    Some(id) => id,
                    None => self.add(t, side, rng),
                };
                self.remove(t, EventType::Cancel, id, false, rng);
            }
        }
    }

    fn background_event(&mut self, t: u32, rng: &mut ChaCha8Rng) {
        let target_kind = self.spec.target.kind();
        let target_side = self.spec.side;
        let mut side = if rng.random_bool(0.5) { Side::Bid } else { Side::Ask };
        let roll: f64 = rng.random();
        let kind = if roll < 0.5 {
            EventKind::Order
        } else if roll < 0.8 {
            EventKind::Cancel
        } else {
            EventKind::Trade
        };
        if kind == target_kind && side == target_side {
            side = side.opposite();
        }
        match kind {
            EventKind::Order => {
                if self.live_on(side) < self.spec.max_live_per_side {
                    self.add(t, side, rng);
                } else if !(target_kind == EventKind::Cancel && side == target_side) {
                    if let Some(id) = self.random_order(side, rng) {
                        self.remove(t, EventType::Cancel, id, false, rng);
                    }
                }
            }
            EventKind::Cancel => {
                if self.live_on(side) > MIN_BACKGROUND_DEPTH {
                    if let Some(id) = self.random_order(side, rng) {
                        self.remove(t, EventType::Cancel, id, true, rng);
                    }
                } else if !(target_kind == EventKind::Order && side == target_side) {
                    self.add(t, side, rng);
                }
            }
            EventKind::Trade => {
                if self.live_on(side) > MIN_BACKGROUND_DEPTH {
                    if let Some(id) = self.best_order(side) {
                        self.remove(t, EventType::Execute, id, true, rng);
                    }
                } else if !(target_kind == EventKind::Order && side == target_side) {
                    self.add(t, side, rng);
                }
            }
        }
    }
}

/// Build a valid one-day stream realizing the prescribed durations.
pub fn synth_order_flow(spec: &OrderFlowSpec, seed: u64) -> Result<SyntheticDay, SynthError> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let durations = spec.durations.sample(spec.n_durations, &mut rng)?;

    let start = spec.session.start();
    let first_target = start as u64 + 1000;
    let total: u64 = durations.iter().map(|&d| d as u64).sum();
    let last_target = first_target + total;
    if last_target >= spec.session.end() as u64 {
        return Err(SynthError::InvalidShapeParams(format!(
            "{} durations totalling {} ms do not fit in the {} ms session",
            durations.len(),
            total,
            spec.session.len_ms()
        )));
    }
    let mut targets = Vec::with_capacity(durations.len() + 1);
    let mut t = first_target as u32;
    targets.push(t);
    for &d in &durations {
        t += d;
        targets.push(t);
    }

    let n_background = (spec.background_ratio * targets.len() as f64).round() as usize;
    let mut background: Vec<u32> = (0..n_background)
        .map(|_| rng.random_range(first_target as u32..=last_target as u32))
        .collect();
    background.sort_unstable();

    let mut builder = FlowBuilder::new(spec);
    builder.seed_book(start, &mut rng);
    let mut bg = background.into_iter().peekable();
    for &target in &targets {
        while let Some(&b) = bg.peek() {
            if b > target {
                break;
            }
            builder.background_event(b, &mut rng);
            bg.next();
        }
        builder.target_event(target, &mut rng);
    }
    for b in bg {
        builder.background_event(b, &mut rng);
    }
    Ok(SyntheticDay {
        events: builder.events,
        durations,
    })
}
