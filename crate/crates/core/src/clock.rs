//! Per-bond Poisson ring times, reproducible from `(seed, replicate, bond)`.
//!
//! Every bond `m` (between sites `m` and `m+1`, `m ∈ ℤ`) owns an independent
//! ChaCha8 stream whose key is the triple `(seed, replicate, bond)`. Ring
//! times are cumulative sums of Exponential(1) draws from that stream, so a
//! bond's rings never depend on which other bonds a simulation touches or
//! how far its horizon extends. Windowed simulations can therefore grow
//! their window and replay exactly the rings they used before.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

/// Independent randomness families derived from one master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    BondClock = 0,
    ChainChoice = 1,
    LppWeights = 2,
    Sampler = 3,
    Identity = 4,
}

/// Master seed plus replicate id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub replicate: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replicate: u64) -> Self {
        StreamKey { seed, replicate }
    }

    /// Generator for `(domain, lane)` under this key.
    pub fn rng(&self, domain: Domain, lane: i64) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.replicate.to_le_bytes());
        bytes[16..24].copy_from_slice(&lane.to_le_bytes());
        bytes[24..].copy_from_slice(&(domain as u64).to_le_bytes());
        ChaCha8Rng::from_seed(bytes)
    }
}

/// Streaming view of one bond's rings: yields them in order without storing.
#[derive(Clone, Debug)]
pub struct RingCursor {
    rng: ChaCha8Rng,
    current: f64,
    draws: u64,
}

impl RingCursor {
    pub fn new(key: StreamKey, bond: i64) -> Self {
        let mut cursor = RingCursor { rng: key.rng(Domain::BondClock, bond), current: 0.0, draws: 0 };
        cursor.advance();
        cursor
    }

    /// The most recently generated ring (the first ring initially).
    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Generates the next ring and returns it.
    pub fn advance(&mut self) -> f64 {
        let gap: f64 = Exp1.sample(&mut self.rng);
        self.current += gap;
        self.draws += 1;
        self.current
    }

    /// First ring strictly after `t`, given that queries arrive in increasing `t`.
    pub fn next_after(&mut self, t: f64) -> f64 {
        while self.current <= t {
            self.advance();
        }
        self.current
    }
}

/// A bond clock that remembers its rings and extends lazily.
#[derive(Clone, Debug)]
pub struct ClockStream {
    key: StreamKey,
    bond: i64,
    cursor: RingCursor,
    rings: Vec<f64>,
}

impl ClockStream {
    pub fn new(key: StreamKey, bond: i64) -> Self {
        ClockStream { key, bond, cursor: RingCursor::new(key, bond), rings: Vec::new() }
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn bond(&self) -> i64 {
        self.bond
    }

    /// All rings in `[0, horizon]`; previously returned rings are a prefix.
    pub fn ring_times(&mut self, horizon: f64) -> &[f64] {
        while self.cursor.current() <= horizon {
            self.rings.push(self.cursor.current());
            self.cursor.advance();
        }
        let end = self.rings.partition_point(|&t| t <= horizon);
        &self.rings[..end]
    }
}

/// Rings of one bond up to `horizon`.
pub fn ring_times(seed: u64, replicate: u64, bond: i64, horizon: f64) -> Vec<f64> {
    ClockStream::new(StreamKey::new(seed, replicate), bond).ring_times(horizon).to_vec()
}

/// One attempted update: the clock of `bond` rang at `time`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub time: f64,
    pub bond: i64,
}

impl Eq for Ring {}

impl Ord for Ring {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.bond.cmp(&other.bond))
    }
}

impl PartialOrd for Ring {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Materialized merge of several bonds' rings, sorted by `(time, bond)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventQueue {
    pub events: Vec<Ring>,
}

impl EventQueue {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// All rings of bonds `first..=last` in `[0, horizon]`, globally sorted.
pub fn merge_events(key: StreamKey, first: i64, last: i64, horizon: f64) -> EventQueue {
    EventQueue { events: RingMerge::new(key, first, last, horizon).collect() }
}

/// Lazy k-way merge of bond clocks; the streaming form of [`merge_events`].
pub struct RingMerge {
    first: i64,
    horizon: f64,
    cursors: Vec<RingCursor>,
    heap: BinaryHeap<std::cmp::Reverse<Ring>>,
}

impl RingMerge {
    pub fn new(key: StreamKey, first: i64, last: i64, horizon: f64) -> Self {
        let mut cursors = Vec::new();
        let mut heap = BinaryHeap::new();
        if last >= first {
            for bond in first..=last {
                let c = RingCursor::new(key, bond);
                if c.current() <= horizon {
                    heap.push(std::cmp::Reverse(Ring { time: c.current(), bond }));
                }
                cursors.push(c);
            }
        }
        RingMerge { first, horizon, cursors, heap }
    }
}

impl Iterator for RingMerge {
    type Item = Ring;

    fn next(&mut self) -> Option<Ring> {
        let std::cmp::Reverse(ring) = self.heap.pop()?;
        let c = &mut self.cursors[(ring.bond - self.first) as usize];
        let t = c.advance();
        if t <= self.horizon {
            self.heap.push(std::cmp::Reverse(Ring { time: t, bond: ring.bond }));
        }
        Some(ring)
    }
}
