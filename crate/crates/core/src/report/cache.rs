//! On-disk cache of replayed days and their duration series.
//!
//! Entries are keyed by SHA-256 over the raw log bytes and every setting
//! that influences the cached value.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::book::{ClassifiedEvent, DayReplay, EventKind, MidPoint};
use crate::durations::{self, DurationConfig, DurationSeries, Variable};
use crate::ingest::{SessionWindow, Side};

pub const REPLAY_MAGIC: &[u8; 8] = b"LOBC0001";
const EVENT_LEN: usize = 27;
const MID_LEN: usize = 13;
const NO_LIFETIME: u32 = u32::MAX;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn replay_key(log_bytes: &[u8], session: &SessionWindow, deletes_are_cancels: bool) -> String {
    let mut h = Sha256::new();
    h.update(REPLAY_MAGIC);
    h.update(Sha256::digest(log_bytes));
    h.update(session.open.to_le_bytes());
    h.update(session.close.to_le_bytes());
    h.update(session.trim.to_le_bytes());
    h.update([deletes_are_cancels as u8]);
    hex::encode(h.finalize())
}

pub fn durations_key(
    replay_key: &str,
    config: &DurationConfig,
    variables: &[Variable],
    sides: &[Side],
) -> String {
    let mut h = Sha256::new();
    h.update(durations::BINARY_MAGIC);
    h.update(replay_key.as_bytes());
    for v in &config.best_only {
        h.update([b'b', v.code()]);
    }
    h.update([config.drop_zeros as u8]);
    for v in variables {
        h.update([b'v', v.code()]);
    }
    for s in sides {
        h.update([b's', s.code()]);
    }
    hex::encode(h.finalize())
}

pub fn encode_replay(replay: &DayReplay) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        16 + replay.events.len() * EVENT_LEN + replay.mids.len() * MID_LEN,
    );
    out.extend_from_slice(REPLAY_MAGIC);
    out.extend_from_slice(&(replay.events.len() as u32).to_le_bytes());
    for e in &replay.events {
        out.extend_from_slice(&e.timestamp.to_le_bytes());
        out.push(e.kind.code());
        out.push(e.side.code());
        out.push(e.at_best as u8);
        out.extend_from_slice(&e.order_id.to_le_bytes());
        out.extend_from_slice(&e.price.to_le_bytes());
        out.extend_from_slice(&e.quantity.to_le_bytes());
        out.extend_from_slice(&e.lifetime_ms.unwrap_or(NO_LIFETIME).to_le_bytes());
    }
    out.extend_from_slice(&(replay.mids.len() as u32).to_le_bytes());
    for m in &replay.mids {
        out.extend_from_slice(&m.timestamp.to_le_bytes());
        out.push(m.mid.is_some() as u8);
        out.extend_from_slice(&m.mid.unwrap_or(0.0).to_le_bytes());
    }
    out
}

pub fn decode_replay(bytes: &[u8]) -> Option<DayReplay> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != REPLAY_MAGIC {
        return None;
    }
    let n = r.u32()? as usize;
    let mut events = Vec::with_capacity(n.min(bytes.len() / EVENT_LEN));
    for _ in 0..n {
        let timestamp = r.u32()?;
        let kind = EventKind::from_code(r.u8()?)?;
        let side = Side::from_code(r.u8()?)?;
        let at_best = r.u8()? != 0;
        let order_id = u64::from_le_bytes(r.take(8)?.try_into().ok()?);
        let price = r.u32()?;
        let quantity = r.u32()?;
        let lifetime = r.u32()?;
        events.push(ClassifiedEvent {
            timestamp,
            kind,
            side,
            at_best,
            order_id,
            price,
            quantity,
            lifetime_ms: (lifetime != NO_LIFETIME).then_some(lifetime),
        });
    }
    let m = r.u32()? as usize;
    let mut mids = Vec::with_capacity(m.min(bytes.len() / MID_LEN));
    for _ in 0..m {
        let timestamp = r.u32()?;
        let has = r.u8()? != 0;
        let mid = f64::from_le_bytes(r.take(8)?.try_into().ok()?);
        mids.push(MidPoint {
            timestamp,
            mid: has.then_some(mid),
        });
    }
    (r.pos == bytes.len()).then_some(DayReplay { events, mids })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(out)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
}

/// A directory of cache entries. Unreadable entries count as misses.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    fn path(&self, key: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{key}.{ext}"))
    }

    fn store(&self, path: &Path, bytes: &[u8]) {
        let tmp = path.with_extension("tmp");
        let res = std::fs::write(&tmp, bytes).and_then(|_| std::fs::rename(&tmp, path));
        if let Err(e) = res {
            log::warn!("cache write {} failed: {e}", path.display());
        }
    }

    pub fn load_replay(&self, key: &str) -> Option<DayReplay> {
        let bytes = std::fs::read(self.path(key, "replay")).ok()?;
        decode_replay(&bytes)
    }

    pub fn store_replay(&self, key: &str, replay: &DayReplay) {
        self.store(&self.path(key, "replay"), &encode_replay(replay));
    }

    pub fn load_durations(&self, key: &str) -> Option<Vec<DurationSeries>> {
        let bytes = std::fs::read(self.path(key, "dur")).ok()?;
        durations::decode_binary(&bytes).ok()
    }

    pub fn store_durations(&self, key: &str, series: &[DurationSeries]) {
        self.store(&self.path(key, "dur"), &durations::encode_binary(series));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DayReplay {
        DayReplay {
            events: vec![
                ClassifiedEvent {
                    timestamp: 100,
                    kind: EventKind::Order,
                    side: Side::Bid,
                    at_best: false,
                    order_id: 1 << 40,
                    price: 10,
                    quantity: 5,
                    lifetime_ms: None,
                },
                ClassifiedEvent {
                    timestamp: 150,
                    kind: EventKind::Cancel,
                    side: Side::Bid,
                    at_best: true,
                    order_id: 1 << 40,
                    price: 10,
                    quantity: 5,
                    lifetime_ms: Some(50),
                },
            ],
            mids: vec![
                MidPoint { timestamp: 100, mid: None },
                MidPoint { timestamp: 120, mid: Some(10.5) },
            ],
        }
    }

    #[test]
    fn replay_round_trip() {
        let r = sample();
        let bytes = encode_replay(&r);
        assert_eq!(bytes.len(), 8 + 4 + 2 * EVENT_LEN + 4 + 2 * MID_LEN);
        assert_eq!(decode_replay(&bytes), Some(r));
        assert_eq!(decode_replay(&bytes[..bytes.len() - 1]), None);
        assert_eq!(decode_replay(b"LOBC0002\0\0\0\0\0\0\0\0"), None);
    }

    #[test]
    fn keys_depend_on_settings() {
        let s = SessionWindow { open: 0, close: 100_000, trim: 0 };
        let a = replay_key(b"x", &s, true);
        assert_ne!(a, replay_key(b"x", &s, false));
        assert_ne!(a, replay_key(b"y", &s, true));
        let cfg = DurationConfig::default();
        let k = durations_key(&a, &cfg, &Variable::ALL, &Side::BOTH);
        let cfg2 = DurationConfig { drop_zeros: true, ..cfg.clone() };
        assert_ne!(k, durations_key(&a, &cfg2, &Variable::ALL, &Side::BOTH));
        assert_ne!(k, durations_key(&a, &cfg, &Variable::ALL, &[Side::Bid]));
    }

    #[test]
    fn directory_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        assert!(cache.load_replay("k").is_none());
        cache.store_replay("k", &sample());
        assert_eq!(cache.load_replay("k"), Some(sample()));
    }
}
