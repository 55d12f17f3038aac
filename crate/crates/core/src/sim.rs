//! The oriented swap process on `[1, n]` and its time-change variants.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::clock::{Domain, StreamKey};
use crate::error::{invalid, Error, Result};
use crate::perm::{inversion_number, Permutation};
use crate::schedule::{Driver, RingSystem, Scheduler};

impl RingSystem for Permutation {
    fn bond_range(&self) -> (i64, i64) {
        (1, self.n() as i64 - 1)
    }

    fn is_active(&self, bond: i64) -> bool {
        self.has_ascent(bond as usize)
    }

    fn fire(&mut self, bond: i64) -> bool {
        self.sort_at_unchecked(bond as usize)
    }
}

/// What to keep from a replay besides finishing times.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Recorder {
    /// Absolute times at which to store the full configuration.
    pub snapshot_times: Vec<f64>,
    /// Labels whose positions are sampled on `trajectory_times`.
    pub tracked: Vec<u32>,
    pub trajectory_times: Vec<f64>,
    /// Keep every visited ring in [`ProcessPath::events`].
    pub log_events: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub horizon: f64,
    pub key: StreamKey,
    #[serde(default)]
    pub driver: Driver,
    #[serde(default)]
    pub recorder: Recorder,
}

impl SimConfig {
    pub fn new(n: usize, horizon: f64, seed: u64, replicate: u64) -> Self {
        SimConfig { n, horizon, key: StreamKey::new(seed, replicate), driver: Driver::default(), recorder: Recorder::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapEvent {
    pub time: f64,
    pub bond: i64,
    pub applied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub state: Permutation,
    /// Applied swaps so far; equals the inversion number of `state`.
    pub inversions: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub label: u32,
    pub times: Vec<f64>,
    pub positions: Vec<u32>,
}

/// Record of one replay of the swap process.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcessPath {
    pub n: usize,
    pub horizon: f64,
    pub events: Vec<SwapEvent>,
    pub snapshots: Vec<Snapshot>,
    pub trajectories: Vec<Trajectory>,
    /// `β(k)` at index `k-1`; `None` if particle `k` may still move after the horizon.
    pub finish: Vec<Option<f64>>,
    /// Hitting time of the reverse permutation, `β_*`.
    pub absorbed_at: Option<f64>,
    pub applied: u64,
    pub final_state: Permutation,
}

impl ProcessPath {
    pub fn beta(&self, k: u32) -> Option<f64> {
        self.finish[k as usize - 1]
    }

    pub fn beta_star(&self) -> Option<f64> {
        self.absorbed_at
    }

    pub fn snapshot_at(&self, time: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.time - time).abs() <= 1e-9 * time.abs().max(1.0))
    }

    /// Scaled configuration `μ_s` from the snapshot at time `s·n`.
    pub fn empirical_measure(&self, s: f64) -> Result<EmpiricalMeasure> {
        let snap = self
            .snapshot_at(s * self.n as f64)
            .ok_or_else(|| Error::InvalidInput(format!("no snapshot recorded at s = {s}")))?;
        Ok(EmpiricalMeasure::new(&snap.state))
    }

    /// Samples of `s ↦ η_{ns}⁻¹(k)/n` for a tracked label.
    pub fn scaled_trajectory(&self, k: u32) -> Result<Vec<(f64, f64)>> {
        if k == 0 || k as usize > self.n {
            return invalid(format!("label {k} outside 1..={}", self.n));
        }
        let tr = self
            .trajectories
            .iter()
            .find(|t| t.label == k)
            .ok_or_else(|| Error::InvalidInput(format!("label {k} was not tracked")))?;
        let n = self.n as f64;
        Ok(tr.times.iter().zip(&tr.positions).map(|(&t, &p)| (t / n, p as f64 / n)).collect())
    }
}

/// Finishing times from last-move times and the final state: particle `k`
/// is done iff it sits at `n+1-k` with labels `1..k` filling `n+1-k..=n`.
fn settle_finish(state: &Permutation, last_move: &[f64]) -> Vec<Option<f64>> {
    let n = state.n();
    let mut lowest = usize::MAX;
    (1..=n as u32)
        .map(|k| {
            let pos = state.position_of(k);
            lowest = lowest.min(pos);
            let target = n + 1 - k as usize;
            (pos == target && lowest >= target).then(|| last_move[k as usize - 1])
        })
        .collect()
}

/// Replays the bond clocks `1..n-1` against the identity permutation.
pub fn simulate(cfg: &SimConfig) -> Result<ProcessPath> {
    let n = cfg.n;
    if n < 2 {
        return invalid("simulate needs n >= 2");
    }
    if !(cfg.horizon >= 0.0) {
        return invalid("horizon must be nonnegative");
    }
    let rec = &cfg.recorder;
    let mut snap_times = rec.snapshot_times.clone();
    snap_times.sort_by(f64::total_cmp);
    let mut traj_times = rec.trajectory_times.clone();
    traj_times.sort_by(f64::total_cmp);
    if snap_times.iter().chain(&traj_times).any(|&t| !(0.0..=cfg.horizon).contains(&t)) {
        return invalid("observation times must lie in [0, horizon]");
    }
    for &k in &rec.tracked {
        if k == 0 || k as usize > n {
            return invalid(format!("tracked label {k} outside 1..={n}"));
        }
    }

    let full = (n as u64) * (n as u64 - 1) / 2;
    let mut sigma = Permutation::identity(n);
    let mut last_move = vec![0.0f64; n];
    let mut events = Vec::new();
    let mut snapshots = Vec::with_capacity(snap_times.len());
    let mut trajectories: Vec<Trajectory> = rec
        .tracked
        .iter()
        .map(|&label| Trajectory { label, times: Vec::new(), positions: Vec::new() })
        .collect();
    let mut recorder = Cuts { snap_times: &snap_times, traj_times: &traj_times, next_snap: 0, next_traj: 0 };
    let mut applied = 0u64;
    let mut absorbed_at = None;

    let mut sched = Scheduler::new(cfg.driver, cfg.key, &sigma, cfg.horizon);
    while let Some(ring) = sched.next_ring(&sigma) {
        recorder.flush(&sigma, applied, ring.time, &mut snapshots, &mut trajectories);
        let acted = sigma.fire(ring.bond);
        sched.after_fire(&sigma, ring);
        if rec.log_events {
            events.push(SwapEvent { time: ring.time, bond: ring.bond, applied: acted });
        }
        if acted {
            applied += 1;
            let b = ring.bond as usize;
            last_move[sigma.label_at(b) as usize - 1] = ring.time;
            last_move[sigma.label_at(b + 1) as usize - 1] = ring.time;
            if applied == full {
                absorbed_at = Some(ring.time);
                break;
            }
        }
    }
    recorder.flush(&sigma, applied, f64::INFINITY, &mut snapshots, &mut trajectories);

    Ok(ProcessPath {
        n,
        horizon: cfg.horizon,
        events,
        snapshots,
        trajectories,
        finish: settle_finish(&sigma, &last_move),
        absorbed_at,
        applied,
        final_state: sigma,
    })
}

/// Cursor over requested observation times; the state at time `τ` is the
/// state after every event with time `<= τ`.
struct Cuts<'a> {
    snap_times: &'a [f64],
    traj_times: &'a [f64],
    next_snap: usize,
    next_traj: usize,
}

impl Cuts<'_> {
    fn flush(&mut self, sigma: &Permutation, applied: u64, before: f64, snaps: &mut Vec<Snapshot>, trajs: &mut [Trajectory]) {
        while self.next_snap < self.snap_times.len() && self.snap_times[self.next_snap] < before {
            snaps.push(Snapshot { time: self.snap_times[self.next_snap], state: sigma.clone(), inversions: applied });
            self.next_snap += 1;
        }
        while self.next_traj < self.traj_times.len() && self.traj_times[self.next_traj] < before {
            for tr in trajs.iter_mut() {
                tr.times.push(self.traj_times[self.next_traj]);
                tr.positions.push(sigma.position_of(tr.label) as u32);
            }
            self.next_traj += 1;
        }
    }
}

/// `μ_s = (1/n) Σ_k δ(k/n, η(k)/n)`: position on the first axis, label on the second.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub n: usize,
    /// `labels[k-1] = η(k)`.
    labels: Vec<u32>,
}

impl EmpiricalMeasure {
    pub fn new(state: &Permutation) -> Self {
        EmpiricalMeasure { n: state.n(), labels: state.forward().to_vec() }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n as f64;
        self.labels.iter().enumerate().map(move |(k, &l)| ((k + 1) as f64 / n, l as f64 / n))
    }

    pub fn total_mass(&self) -> f64 {
        self.labels.len() as f64 / self.n as f64
    }

    /// `μ_s([0, x] × [0, y])`.
    pub fn cdf(&self, x: f64, y: f64) -> f64 {
        let n = self.n as f64;
        let cols = ((n * x + 1e-9).floor().max(0.0) as usize).min(self.n);
        let rows = (n * y + 1e-9).floor().max(0.0) as u32;
        self.labels[..cols].iter().filter(|&&l| l <= rows).count() as f64 / n
    }
}

/// The four time parameterizations of the swap chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Each ascent fires at rate 1 (the bond-clock process).
    ContinuousVariable,
    /// At total rate 1, a uniform ascent fires.
    ContinuousFixed,
    /// Each step picks a uniform bond; descents are no-ops.
    DiscreteVariable,
    /// Each step picks a uniform ascent.
    DiscreteFixed,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "continuous-variable" => Variant::ContinuousVariable,
            "continuous-fixed" => Variant::ContinuousFixed,
            "discrete-variable" => Variant::DiscreteVariable,
            "discrete-fixed" => Variant::DiscreteFixed,
            other => return invalid(format!("unknown variant {other:?}")),
        })
    }
}

/// Runs one of the four variants for `duration` (time, or steps for the
/// discrete chains). Every visited ring or step is logged in `events`;
/// discrete step `j` is logged at time `j`.
pub fn simulate_variant(n: usize, duration: f64, variant: Variant, key: StreamKey) -> Result<ProcessPath> {
    if variant == Variant::ContinuousVariable {
        let mut cfg = SimConfig { n, horizon: duration, key, driver: Driver::FullMerge, recorder: Recorder::default() };
        cfg.recorder.log_events = true;
        return simulate(&cfg);
    }
    if n < 2 {
        return invalid("simulate needs n >= 2");
    }
    if !(duration >= 0.0) {
        return invalid("duration must be nonnegative");
    }
    let full = (n as u64) * (n as u64 - 1) / 2;
    let mut rng = key.rng(Domain::ChainChoice, 0);
    let mut sigma = Permutation::identity(n);
    let mut last_move = vec![0.0f64; n];
    let mut events = Vec::new();
    let mut applied = 0u64;
    let mut absorbed_at = None;
    let mut clock = 0.0f64;
    let mut step = 0u64;

    while applied < full {
        let time = match variant {
            Variant::ContinuousFixed => {
                let gap: f64 = Exp1.sample(&mut rng);
                clock += gap;
                clock
            }
            _ => {
                step += 1;
                step as f64
            }
        };
        if time > duration {
            break;
        }
        let bond = match variant {
            Variant::DiscreteVariable => rng.random_range(1..n),
            _ => {
                let asc = sigma.ascents();
                asc.get(rng.random_range(0..asc.len()))
            }
        };
        let acted = sigma.sort_at_unchecked(bond);
        events.push(SwapEvent { time, bond: bond as i64, applied: acted });
        if acted {
            applied += 1;
            last_move[sigma.label_at(bond) as usize - 1] = time;
            last_move[sigma.label_at(bond + 1) as usize - 1] = time;
            if applied == full {
                absorbed_at = Some(time);
            }
        }
    }

    Ok(ProcessPath {
        n,
        horizon: duration,
        events,
        snapshots: Vec::new(),
        trajectories: Vec::new(),
        finish: settle_finish(&sigma, &last_move),
        absorbed_at,
        applied,
        final_state: sigma,
    })
}

/// Distinct states visited by a logged path, starting with the identity.
pub fn visited_states(path: &ProcessPath) -> Vec<Permutation> {
    let mut sigma = Permutation::identity(path.n);
    let mut out = vec![sigma.clone()];
    for ev in path.events.iter().filter(|e| e.applied) {
        sigma.swap(ev.bond as usize).expect("logged bond is valid");
        out.push(sigma.clone());
    }
    out
}

/// Inversion number of every snapshot recomputed from scratch.
pub fn snapshot_inversions(path: &ProcessPath) -> Vec<u64> {
    path.snapshots.iter().map(|s| inversion_number(&s.state)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ring_times;

    fn cfg(n: usize, horizon: f64, seed: u64) -> SimConfig {
        SimConfig::new(n, horizon, seed, 0)
    }

    #[test]
    fn two_particles_swap_at_first_ring() {
        let t0 = ring_times(5, 0, 1, 100.0)[0];
        let mut c = cfg(2, 100.0, 5);
        c.recorder.snapshot_times = vec![t0 * 0.5, t0 * 1.5];
        let path = simulate(&c).unwrap();
        assert_eq!(path.snapshots[0].state, Permutation::identity(2));
        assert_eq!(path.snapshots[1].state, Permutation::reverse(2));
        assert_eq!(path.beta(1), Some(t0));
        assert_eq!(path.beta(2), Some(t0));
        assert_eq!(path.beta_star(), Some(t0));
    }

    #[test]
    fn short_horizon_leaves_sentinels() {
        let path = simulate(&cfg(30, 1.0, 1)).unwrap();
        assert!(path.absorbed_at.is_none());
        assert!(path.finish.iter().any(|b| b.is_none()));
    }

    #[test]
    fn drivers_agree() {
        for seed in 0..5 {
            let mut a = cfg(40, 60.0, seed);
            a.recorder.snapshot_times = vec![10.0, 25.0, 40.0];
            a.recorder.tracked = vec![1, 13, 40];
            a.recorder.trajectory_times = (0..60).map(|i| i as f64).collect();
            let mut b = a.clone();
            b.driver = Driver::FullMerge;
            let (pa, pb) = (simulate(&a).unwrap(), simulate(&b).unwrap());
            assert_eq!(pa.snapshots, pb.snapshots);
            assert_eq!(pa.trajectories, pb.trajectories);
            assert_eq!(pa.finish, pb.finish);
            assert_eq!(pa.absorbed_at, pb.absorbed_at);
            assert_eq!(pa.final_state, pb.final_state);
        }
    }

    #[test]
    fn absorbed_path_ends_reversed() {
        let path = simulate(&cfg(25, 125.0, 3)).unwrap();
        assert!(path.final_state.is_reverse());
        let star = path.beta_star().unwrap();
        let max = path.finish.iter().map(|b| b.unwrap()).fold(0.0, f64::max);
        assert_eq!(star, max);
    }

    #[test]
    fn snapshot_inversions_match_event_count() {
        let mut c = cfg(60, 150.0, 9);
        c.recorder.snapshot_times = (1..15).map(|i| i as f64 * 10.0).collect();
        let path = simulate(&c).unwrap();
        let recomputed = snapshot_inversions(&path);
        let counted: Vec<u64> = path.snapshots.iter().map(|s| s.inversions).collect();
        assert_eq!(recomputed, counted);
        assert!(counted.windows(2).all(|w| w[0] <= w[1]));
        for s in &path.snapshots {
            let inv = s.state.inverted();
            for k in 1..=60u32 {
                assert_eq!(inv.label_at(k as usize) as usize, s.state.position_of(k));
            }
        }
    }

    #[test]
    fn boundary_trajectories_are_monotone() {
        let n = 50;
        let mut c = cfg(n, 150.0, 4);
        c.recorder.tracked = vec![1, n as u32];
        c.recorder.trajectory_times = (0..=150).map(|i| i as f64).collect();
        let path = simulate(&c).unwrap();
        let first = path.scaled_trajectory(1).unwrap();
        let last = path.scaled_trajectory(n as u32).unwrap();
        assert!(first.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(last.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!(path.scaled_trajectory(0).is_err());
        assert!(path.scaled_trajectory(7).is_err());
    }

    #[test]
    fn empirical_measure_extremes() {
        let n = 40;
        let mut c = cfg(n, 4.0 * n as f64, 8);
        c.recorder.snapshot_times = vec![0.0, 4.0 * n as f64];
        let path = simulate(&c).unwrap();
        let start = path.empirical_measure(0.0).unwrap();
        let end = path.empirical_measure(4.0).unwrap();
        assert!((start.total_mass() - 1.0).abs() < 1e-15);
        for i in 0..=10 {
            for j in 0..=10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                let id = ((n as f64 * x).floor().min((n as f64 * y).floor())) / n as f64;
                assert!((start.cdf(x, y) - id).abs() < 1e-12);
                assert!((end.cdf(x, y) - (x + y - 1.0).max(0.0)).abs() <= 1.0 / n as f64 + 1e-12);
            }
        }
        assert!(path.empirical_measure(0.5).is_err());
    }

    #[test]
    fn variants_visit_states_in_inversion_order() {
        for variant in [Variant::ContinuousVariable, Variant::ContinuousFixed, Variant::DiscreteVariable, Variant::DiscreteFixed] {
            let path = simulate_variant(12, 400.0, variant, StreamKey::new(2, 1)).unwrap();
            for (j, state) in visited_states(&path).iter().enumerate() {
                assert_eq!(inversion_number(state), j as u64, "{variant:?}");
            }
        }
    }

    #[test]
    fn matched_swap_sequences_visit_same_states() {
        let path = simulate_variant(9, 30.0, Variant::ContinuousVariable, StreamKey::new(6, 0)).unwrap();
        let mut sigma = Permutation::identity(9);
        let mut visited = vec![sigma.clone()];
        for ev in &path.events {
            if sigma.sort_at(ev.bond as usize).unwrap() {
                visited.push(sigma.clone());
            }
        }
        assert_eq!(visited, visited_states(&path));
    }
}
