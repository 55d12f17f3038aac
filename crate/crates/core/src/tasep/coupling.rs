//! Pathwise checks of the swap process against the exclusion processes it
//! projects to, all driven by one family of bond clocks.

use serde::{Deserialize, Serialize};

use crate::clock::{RingMerge, StreamKey};
use crate::error::{invalid, Result};
use crate::perm::Permutation;
use crate::schedule::RingSystem;

use super::config::BinaryConfig;
use super::lattice::{with_window, Lattice, WindowPolicy};

/// Outcome of one coupled replay.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub k: u32,
    pub seed: u64,
    pub replicate: u64,
    /// Rings after which at least one process changed.
    pub events_checked: u64,
    /// `ν^{k,n} = T_k η` failures.
    pub projection_failures: u64,
    /// `ν^{k,n} = B_n R_k ν^k` failures.
    pub pushback_failures: u64,
    /// Position of label `k` differs from the discrepancy of `(ν^{k,n}, ν^{k-1,n})`.
    pub discrepancy_failures: u64,
    /// The same discrepancy differs from `(Σ ∨ π(k)) ∧ θ(n, S(n))` of the line pair.
    pub transform_failures: u64,
    pub half_width: i64,
    pub retries: u32,
    pub first_failure: Option<String>,
}

impl CouplingReport {
    pub fn failures(&self) -> u64 {
        self.projection_failures + self.pushback_failures + self.discrepancy_failures + self.transform_failures
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0 && self.events_checked > 0
    }
}

/// Replays, on shared clocks and in ring order, the swap process on
/// `[1, n]`, the interval processes `ν^{k,n}` and `ν^{k-1,n}`, and the line
/// pair `(ν^k, ν^{k-1})` as one three-state lattice, checking after every
/// ring that changed anything.
pub fn check_coupling(n: usize, k: u32, horizon: f64, key: StreamKey, policy: &WindowPolicy) -> Result<CouplingReport> {
    if n < 2 || k == 0 || k as usize > n {
        return invalid(format!("coupling needs n >= 2 and 1 <= k <= n, got n={n}, k={k}"));
    }
    let (report, half_width, retries) = with_window(horizon, policy, |m| {
        let m = m.max(n as i64 + 2);
        let k_site = k as i64;
        let mut line = Lattice::step(k_site, k_site - m, k_site + m, true, true)?;
        let mut upper = Lattice::step(k_site, 1, n as i64, false, false)?;
        let mut lower = Lattice::step(k_site - 1, 1, n as i64, false, false)?;
        let mut sigma = Permutation::identity(n);
        let mut report = CouplingReport { n, k, seed: key.seed, replicate: key.replicate, ..Default::default() };

        let (a, b) = line.bond_range();
        for ring in RingMerge::new(key, a, b, horizon) {
            let mut changed = line.fire(ring.bond);
            if line.breached() {
                return Ok(None);
            }
            if (1..n as i64).contains(&ring.bond) {
                changed |= sigma.fire(ring.bond);
                changed |= upper.fire(ring.bond);
                changed |= lower.fire(ring.bond);
            }
            if changed {
                audit(&mut report, ring.time, n, k, &sigma, &upper, &lower, &line)?;
            }
        }
        Ok(Some(report))
    })?;
    Ok(CouplingReport { half_width, retries, ..report })
}

#[allow(clippy::too_many_arguments)]
fn audit(
    report: &mut CouplingReport,
    time: f64,
    n: usize,
    k: u32,
    sigma: &Permutation,
    upper: &Lattice,
    lower: &Lattice,
    line: &Lattice,
) -> Result<()> {
    report.events_checked += 1;
    let nu = upper.config(true);
    let nu_lower = lower.config(true);
    let note = |report: &mut CouplingReport, what: &str| {
        if report.first_failure.is_none() {
            report.first_failure = Some(format!("{what} at t={time}"));
        }
    };

    if nu != BinaryConfig::project_perm(sigma, k) {
        report.projection_failures += 1;
        note(report, "projection");
    }
    let pushed = line.cutoff(k as usize, true).pushback(n as i64);
    if nu != pushed {
        report.pushback_failures += 1;
        note(report, "pushback");
    }

    let site = nu.discrepancy(&nu_lower).ok();
    if site != Some(sigma.position_of(k) as i64) {
        report.discrepancy_failures += 1;
        note(report, "discrepancy");
    }

    let sigma_line = line.second_class_site().expect("one second-class particle");
    let cut = line.cutoff(k as usize, true);
    let pi = cut.particle_pos(k as usize)?;
    let theta = cut.hole_pos(n as i64, cut.queue_length(n as i64) as usize)?;
    if site != Some(sigma_line.max(pi).min(theta)) {
        report.transform_failures += 1;
        note(report, "second-class transform");
    }
    Ok(())
}
