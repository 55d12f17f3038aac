//! Exclusion dynamics on a finite stretch of sites, driven by bond clocks.
//!
//! The infinite-line process started from a step is simulated on a window
//! `[lo, hi]` outside of which the configuration is frozen: everything below
//! `lo` is occupied and everything above `hi` is empty. As long as site `lo`
//! holds a first-class particle and site `hi` is empty, no bond outside the
//! window can act, so the windowed run equals the infinite one. When that
//! certificate breaks the run is repeated on a doubled window; bond clocks are
//! keyed by bond index, so the repeat sees exactly the same rings.

use serde::{Deserialize, Serialize};

use crate::clock::StreamKey;
use crate::error::{invalid, Error, Result};
use crate::schedule::{Driver, RingSystem, Scheduler};

use super::config::BinaryConfig;

pub const HOLE: u8 = 0;
pub const FIRST: u8 = 1;
pub const SECOND: u8 = 2;

/// Sites of a lattice simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Region {
    /// Closed segment `[first, last]` with no flow through its ends.
    Interval { first: i64, last: i64 },
    /// The whole line, simulated through a certified window.
    Line,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPolicy {
    /// Initial half-width; `None` picks `⌈2T⌉ + ⌈10√T⌉ + 10`.
    pub initial: Option<i64>,
    pub max_half_width: i64,
    pub max_retries: u32,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy { initial: None, max_half_width: 1 << 22, max_retries: 8 }
    }
}

impl WindowPolicy {
    pub fn initial_half_width(&self, horizon: f64) -> i64 {
        self.initial.unwrap_or_else(|| (2.0 * horizon).ceil() as i64 + (10.0 * horizon.sqrt()).ceil() as i64 + 10)
    }
}

/// Three-state exclusion lattice: holes, first-class particles and at most
/// one second-class particle. With no second-class particle this is the
/// plain exclusion process.
#[derive(Clone, Debug)]
pub struct Lattice {
    lo: i64,
    sites: Vec<u8>,
    /// Whether the frozen exterior is present (line) or absent (interval).
    open: bool,
    breached: bool,
    rightmost: Option<i64>,
}

impl Lattice {
    /// `1_{x <= k}` on `[lo, hi]`, optionally with the particle at `k` second-class.
    pub fn step(k: i64, lo: i64, hi: i64, second_class: bool, open: bool) -> Result<Self> {
        if hi <= lo {
            return invalid("lattice needs at least two sites");
        }
        if open && !(lo < k && k < hi) {
            return invalid(format!("step edge {k} must lie strictly inside ({lo}, {hi})"));
        }
        let sites = (lo..=hi)
            .map(|x| if x < k || (x == k && !second_class) { FIRST } else if x == k { SECOND } else { HOLE })
            .collect();
        let mut l = Lattice { lo, sites, open, breached: false, rightmost: None };
        l.rightmost = (lo..=hi).rev().find(|&x| l.get(x) != HOLE);
        Ok(l)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.sites.len() as i64 - 1
    }

    pub fn get(&self, x: i64) -> u8 {
        if x < self.lo {
            if self.open {
                FIRST
            } else {
                HOLE
            }
        } else {
            self.sites.get((x - self.lo) as usize).copied().unwrap_or(HOLE)
        }
    }

    /// Whether the window certificate has been violated.
    pub fn breached(&self) -> bool {
        self.breached
    }

    pub fn rightmost(&self) -> Option<i64> {
        self.rightmost
    }

    /// Site of the second-class particle, by scan.
    pub fn second_class_site(&self) -> Option<i64> {
        self.sites.iter().position(|&v| v == SECOND).map(|i| self.lo + i as i64)
    }

    /// Configuration seen by first-class particles, with the second-class
    /// particle counted as a particle (`upper = true`) or as a hole.
    pub fn config(&self, upper: bool) -> BinaryConfig {
        let occupied = |v: u8| v == FIRST || (upper && v == SECOND);
        let start = if self.open { self.sites.iter().position(|&v| !occupied(v)).unwrap_or(self.sites.len()) } else { 0 };
        let frontier = self.open.then_some(self.lo + start as i64 - 1);
        let sites = self.sites[start..]
            .iter()
            .enumerate()
            .filter(|(_, &v)| occupied(v))
            .map(|(i, _)| self.lo + (start + i) as i64);
        BinaryConfig::from_parts(frontier, sites).expect("sites lie above the frontier")
    }

    /// `R_k` of [`Lattice::config`], reading only the `k` rightmost particles.
    pub fn cutoff(&self, k: usize, upper: bool) -> BinaryConfig {
        let mut out = Vec::with_capacity(k);
        let mut x = self.rightmost.unwrap_or(self.lo - 1);
        while out.len() < k {
            if x < self.lo && !self.open {
                break;
            }
            let v = self.get(x);
            if v == FIRST || (upper && v == SECOND) {
                out.push(x);
            }
            x -= 1;
        }
        BinaryConfig::from_sites(out).expect("distinct sites")
    }

    /// `S(·, x)` of the upper configuration, counted from the right end.
    pub fn queue_length(&self, x: i64) -> u64 {
        let mut total = 0u64;
        let mut y = self.rightmost.unwrap_or(x);
        while y > x {
            total += (self.get(y) != HOLE) as u64;
            y -= 1;
        }
        total
    }
}

impl RingSystem for Lattice {
    fn bond_range(&self) -> (i64, i64) {
        (self.lo, self.hi() - 1)
    }

    fn is_active(&self, bond: i64) -> bool {
        let (a, b) = (self.get(bond), self.get(bond + 1));
        (a != HOLE && b == HOLE) || (a == FIRST && b == SECOND)
    }

    fn fire(&mut self, bond: i64) -> bool {
        if !self.is_active(bond) {
            return false;
        }
        let i = (bond - self.lo) as usize;
        self.sites.swap(i, i + 1);
        if self.rightmost.is_some_and(|r| bond + 1 > r) {
            self.rightmost = Some(bond + 1);
        }
        if self.open && (self.sites[0] != FIRST || *self.sites.last().unwrap() != HOLE) {
            self.breached = true;
        }
        true
    }
}

/// Configurations of one exclusion run at the requested times.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TasepRun {
    pub times: Vec<f64>,
    pub configs: Vec<BinaryConfig>,
    pub final_config: BinaryConfig,
    pub applied: u64,
    /// Half-width of the window that certified the run (0 for intervals).
    pub half_width: i64,
    pub retries: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TasepConfig {
    /// Initial condition `1_{x <= k}`, restricted to the region.
    pub k: i64,
    pub region: Region,
    pub horizon: f64,
    pub key: StreamKey,
    #[serde(default)]
    pub window: WindowPolicy,
    /// Times at which to record the configuration.
    #[serde(default)]
    pub sample_times: Vec<f64>,
}

/// Runs `sys` to the horizon, recording `record(sys)` at each sample time
/// (state after all events at or before it). Stops early on a breach.
fn drive<T>(
    sys: &mut Lattice,
    key: StreamKey,
    horizon: f64,
    samples: &[f64],
    mut record: impl FnMut(&Lattice) -> T,
) -> (Vec<T>, u64) {
    let mut out = Vec::with_capacity(samples.len());
    let mut next = 0;
    let mut applied = 0u64;
    let mut sched = Scheduler::new(Driver::ActiveBonds, key, sys, horizon);
    while let Some(ring) = sched.next_ring(sys) {
        while next < samples.len() && samples[next] < ring.time {
            out.push(record(sys));
            next += 1;
        }
        if sys.fire(ring.bond) {
            applied += 1;
        }
        if sys.breached() {
            return (out, applied);
        }
        sched.after_fire(sys, ring);
    }
    while next < samples.len() {
        out.push(record(sys));
        next += 1;
    }
    (out, applied)
}

fn check_samples(samples: &[f64], horizon: f64) -> Result<Vec<f64>> {
    if !(horizon >= 0.0) {
        return invalid("horizon must be nonnegative");
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    if s.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
        return invalid("sample times must lie in [0, horizon]");
    }
    Ok(s)
}

/// Retries `run(half_width)` with doubled windows until it certifies.
pub(crate) fn with_window<T>(
    horizon: f64,
    policy: &WindowPolicy,
    mut run: impl FnMut(i64) -> Result<Option<T>>,
) -> Result<(T, i64, u32)> {
    let mut m = policy.initial_half_width(horizon).max(2);
    let mut retries = 0;
    loop {
        if m > policy.max_half_width {
            return Err(Error::WindowExhausted { width: 2 * m as u64, max: 2 * policy.max_half_width as u64, retries });
        }
        if let Some(v) = run(m)? {
            return Ok((v, m, retries));
        }
        retries += 1;
        if retries > policy.max_retries {
            return Err(Error::WindowExhausted { width: 2 * m as u64, max: 2 * policy.max_half_width as u64, retries });
        }
        m *= 2;
    }
}

/// `ν_t^{k,I}` (closed interval) or `ν_t^k` (whole line) from the step `1_{x <= k}`.
pub fn simulate_tasep(cfg: &TasepConfig) -> Result<TasepRun> {
    let samples = check_samples(&cfg.sample_times, cfg.horizon)?;
    match cfg.region {
        Region::Interval { first, last } => {
            if last <= first {
                return invalid("interval needs at least two sites");
            }
            let mut lat = Lattice::step(cfg.k, first, last, false, false)?;
            let (configs, applied) = drive(&mut lat, cfg.key, cfg.horizon, &samples, |l| l.config(true));
            Ok(TasepRun { times: samples, configs, final_config: lat.config(true), applied, half_width: 0, retries: 0 })
        }
        Region::Line => {
            let ((configs, applied, fin), half_width, retries) = with_window(cfg.horizon, &cfg.window, |m| {
                let mut lat = Lattice::step(cfg.k, cfg.k - m, cfg.k + m, false, true)?;
                let (configs, applied) = drive(&mut lat, cfg.key, cfg.horizon, &samples, |l| l.config(true));
                Ok((!lat.breached()).then(|| (configs, applied, lat.config(true))))
            })?;
            Ok(TasepRun { times: samples, configs, final_config: fin, applied, half_width, retries })
        }
    }
}

/// Samples of the second-class particle `X_t` of the pair `(ν^k, ν^{k-1})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SecondClassRun {
    pub times: Vec<f64>,
    pub sites: Vec<i64>,
    pub applied: u64,
    pub half_width: i64,
    pub retries: u32,
}

/// Tracks the discrepancy of `(ν_t^k, ν_t^{k-1})` on the whole line.
pub fn second_class_trajectory(
    k: i64,
    horizon: f64,
    sample_times: &[f64],
    key: StreamKey,
    policy: &WindowPolicy,
) -> Result<SecondClassRun> {
    let samples = check_samples(sample_times, horizon)?;
    let ((sites, applied), half_width, retries) = with_window(horizon, policy, |m| {
        let mut lat = Lattice::step(k, k - m, k + m, true, true)?;
        let (sites, applied) = drive(&mut lat, key, horizon, &samples, |l| l.second_class_site().expect("one second-class particle"));
        Ok((!lat.breached()).then_some((sites, applied)))
    })?;
    Ok(SecondClassRun { times: samples, sites, applied, half_width, retries })
}
