//! Replaying bond clocks against a nearest-neighbour system.
//!
//! Two drivers visit rings in `(time, bond)` order:
//!
//! * [`Driver::FullMerge`] visits every ring of every bond.
//! * [`Driver::ActiveBonds`] only visits rings of bonds that can change the
//!   state when they ring. A bond that becomes able to fire at time `t` is
//!   scheduled at its first ring after `t`; the rings it skipped were no-ops.
//!   Both drivers therefore produce the same path for the same key.
//!
//! Systems must be nearest-neighbour: firing bond `b` may only change the
//! activity of bonds `b-1`, `b`, `b+1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::clock::{Ring, RingCursor, RingMerge, StreamKey};

/// State driven by per-bond clocks.
pub trait RingSystem {
    /// Inclusive range of bonds the system reacts to.
    fn bond_range(&self) -> (i64, i64);
    /// Whether a ring at `bond` would change the state right now.
    fn is_active(&self, bond: i64) -> bool;
    /// Applies a ring; returns whether the state changed.
    fn fire(&mut self, bond: i64) -> bool;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Driver {
    #[default]
    ActiveBonds,
    FullMerge,
}

/// Event source for one replay.
pub enum Scheduler {
    Active(ActiveScheduler),
    Merge(RingMerge),
}

impl Scheduler {
    pub fn new<S: RingSystem>(driver: Driver, key: StreamKey, sys: &S, horizon: f64) -> Self {
        match driver {
            Driver::ActiveBonds => Scheduler::Active(ActiveScheduler::new(key, sys, horizon)),
            Driver::FullMerge => {
                let (a, b) = sys.bond_range();
                Scheduler::Merge(RingMerge::new(key, a, b, horizon))
            }
        }
    }

    /// Next ring to visit, or `None` once the horizon is passed.
    pub fn next_ring<S: RingSystem>(&mut self, sys: &S) -> Option<Ring> {
        match self {
            Scheduler::Active(a) => a.next_ring(sys),
            Scheduler::Merge(m) => m.next(),
        }
    }

    /// Must be called after the system processed `ring`.
    pub fn after_fire<S: RingSystem>(&mut self, sys: &S, ring: Ring) {
        if let Scheduler::Active(a) = self {
            a.after_fire(sys, ring);
        }
    }
}

/// Event-driven scheduler over the currently active bonds.
pub struct ActiveScheduler {
    key: StreamKey,
    first: i64,
    horizon: f64,
    cursors: Vec<Option<RingCursor>>,
    scheduled: Vec<f64>,
    heap: BinaryHeap<Reverse<Ring>>,
}

impl ActiveScheduler {
    pub fn new<S: RingSystem>(key: StreamKey, sys: &S, horizon: f64) -> Self {
        let (first, last) = sys.bond_range();
        let width = if last >= first { (last - first + 1) as usize } else { 0 };
        let mut s = ActiveScheduler {
            key,
            first,
            horizon,
            cursors: (0..width).map(|_| None).collect(),
            scheduled: vec![f64::INFINITY; width],
            heap: BinaryHeap::new(),
        };
        for bond in first..first + width as i64 {
            if sys.is_active(bond) {
                s.schedule_after(bond, 0.0);
            }
        }
        s
    }

    fn schedule_after(&mut self, bond: i64, t: f64) {
        let idx = (bond - self.first) as usize;
        let key = self.key;
        let cursor = self.cursors[idx].get_or_insert_with(|| RingCursor::new(key, bond));
        let next = cursor.next_after(t);
        if next <= self.horizon {
            self.scheduled[idx] = next;
            self.heap.push(Reverse(Ring { time: next, bond }));
        } else {
            // nothing more to do for this bond within the horizon
            self.scheduled[idx] = f64::NAN;
        }
    }

    fn next_ring<S: RingSystem>(&mut self, _sys: &S) -> Option<Ring> {
        while let Some(Reverse(ring)) = self.heap.pop() {
            let idx = (ring.bond - self.first) as usize;
            // stale entries are those whose bond was deactivated or rescheduled
            if self.scheduled[idx] == ring.time {
                return Some(ring);
            }
        }
        None
    }

    fn after_fire<S: RingSystem>(&mut self, sys: &S, ring: Ring) {
        let (first, last) = sys.bond_range();
        for bond in (ring.bond - 1).max(first)..=(ring.bond + 1).min(last) {
            let idx = (bond - self.first) as usize;
            let pending = self.scheduled[idx];
            if pending.is_nan() {
                continue;
            }
            if !sys.is_active(bond) {
                self.scheduled[idx] = f64::INFINITY;
            } else if !(pending > ring.time && pending.is_finite()) {
                self.schedule_after(bond, ring.time);
            }
        }
    }
}

/// Drives `sys` to `horizon`, calling `observe` after every visited ring
/// with the ring and whether it changed the state. `observe` may stop the
/// replay early by returning `false`.
pub fn replay<S, F>(sys: &mut S, key: StreamKey, horizon: f64, driver: Driver, mut observe: F)
where
    S: RingSystem,
    F: FnMut(&S, Ring, bool) -> bool,
{
    let mut sched = Scheduler::new(driver, key, sys, horizon);
    while let Some(ring) = sched.next_ring(sys) {
        let applied = sys.fire(ring.bond);
        sched.after_fire(sys, ring);
        if !observe(sys, ring, applied) {
            break;
        }
    }
}
