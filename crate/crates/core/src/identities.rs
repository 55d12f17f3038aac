//! Exact identity checks on random inputs: the reversal identity for
//! sorting sequences, the configuration operator algebra against the dense
//! site-by-site reference, and the exact small-`n` discrete laws.

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{Domain, StreamKey};
use crate::enumerate::{enumerate_discrete, DiscreteSpeed};
use crate::perm::sort_sequence;
use crate::tasep::dense::Dense;
use crate::tasep::BinaryConfig;

/// Failures of one exact identity over a batch of random cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl IdentityCheck {
    fn new(name: &str) -> Self {
        IdentityCheck { name: name.to_string(), cases: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

const SPAN: i64 = 12;
const DENSE_LO: i64 = -2 * SPAN;
const DENSE_HI: i64 = 2 * SPAN;

fn dense(c: &BinaryConfig) -> Dense {
    Dense::from_config(c, DENSE_LO, DENSE_HI)
}

/// A random configuration with sites in `[-SPAN, SPAN]`: a frontier with
/// probability 1/2 when `allow_frontier`, then independent fair sites above it.
pub fn random_config<R: Rng>(rng: &mut R, allow_frontier: bool) -> BinaryConfig {
    let frontier = (allow_frontier && rng.random_bool(0.5)).then(|| rng.random_range(-SPAN..=SPAN));
    let start = frontier.map_or(-SPAN, |f| f + 1);
    let mut sites: Vec<i64> = (start..=SPAN).filter(|_| rng.random_bool(0.5)).collect();
    if frontier.is_none() && sites.is_empty() {
        sites.push(rng.random_range(-SPAN..=SPAN));
    }
    BinaryConfig::from_parts(frontier, sites).expect("sites lie above the frontier")
}

fn occupied_sites(c: &BinaryConfig) -> Vec<i64> {
    (-SPAN..=SPAN).filter(|&x| c.occupied(x)).collect()
}

/// `sort_sequence(seq) = sort_sequence(reverse(seq))⁻¹` on random sequences
/// with `n <= 12` and length `<= 60`.
pub fn check_reversal(cases: u64, seed: u64) -> IdentityCheck {
    let mut rng = StreamKey::new(seed, 0).rng(Domain::Identity, 0);
    let mut check = IdentityCheck::new("reversal");
    for _ in 0..cases {
        let n = rng.random_range(2..=12usize);
        let len = rng.random_range(0..=60usize);
        let seq: Vec<usize> = (0..len).map(|_| rng.random_range(1..n)).collect();
        let rev: Vec<usize> = seq.iter().rev().copied().collect();
        let a = sort_sequence(n, &seq).expect("bonds in range");
        let b = sort_sequence(n, &rev).expect("bonds in range");
        check.record(a == b.inverted(), || format!("n={n}, seq={seq:?}"));
    }
    check
}

/// Queue-length formulas for cutoff and pushback, their commutation, and
/// the three jump-commutation rules, each on `cases` random configurations.
pub fn check_operators(cases: u64, seed: u64) -> Vec<IdentityCheck> {
    let key = StreamKey::new(seed, 0);
    let mut rng = key.rng(Domain::Identity, 1);
    let mut cut = IdentityCheck::new("cutoff-queue-length");
    let mut push = IdentityCheck::new("pushback-queue-length");
    let mut commute = IdentityCheck::new("pushback-cutoff-commute");
    let mut inside = IdentityCheck::new("jump-inside-commutes");
    let mut right = IdentityCheck::new("jump-right-absorbed");
    let mut left = IdentityCheck::new("jump-left-absorbed");

    for _ in 0..cases {
        let c = random_config(&mut rng, true);
        let d = dense(&c);
        let k = rng.random_range(0..=10usize);
        let n = rng.random_range(1..=SPAN);
        let xs = DENSE_LO..=DENSE_HI;

        let rk = c.cutoff(k);
        let rk_dense = d.cutoff(k as u64).to_config();
        let ok = rk == rk_dense && xs.clone().all(|x| rk.queue_length(x) == c.queue_length(x).min(k as u64));
        cut.record(ok, || format!("{c:?}, k={k}"));

        let bn = c.pushback(n);
        let bn_dense = d.pushback(n).to_config();
        let ok = bn == bn_dense && xs.clone().all(|x| bn.queue_length(x) == c.queue_length(x).min((n - x).max(0) as u64));
        push.record(ok, || format!("{c:?}, n={n}"));

        let both = c.cutoff(k).pushback(n);
        commute.record(both == c.pushback(n).cutoff(k) && both == d.cutoff(k as u64).pushback(n).to_config(), || {
            format!("{c:?}, n={n}, k={k}")
        });

        if n >= 2 {
            let m = rng.random_range(1..n);
            let lhs = c.jump(m).cutoff(k).pushback(n);
            let ok = lhs == both.jump(m) && lhs == d.jump(m).cutoff(k as u64).pushback(n).to_config();
            inside.record(ok, || format!("{c:?}, n={n}, k={k}, m={m}"));
        }

        let m = rng.random_range(n..=SPAN + 2);
        let lhs = c.jump(m).cutoff(k).pushback(n);
        let ok = lhs == both && lhs == d.jump(m).cutoff(k as u64).pushback(n).to_config();
        right.record(ok, || format!("{c:?}, n={n}, k={k}, m={m}"));

        // Left rule: needs the k rightmost particles (or all of them) in [1, ∞).
        let k_left = k.max(1);
        let settled = match c.particle_pos(k_left) {
            Ok(p) => p >= 1,
            Err(_) => c.frontier().is_none() && occupied_sites(&c).iter().all(|&x| x >= 1),
        };
        if settled {
            let m = rng.random_range(-SPAN - 2..=0);
            let base = c.cutoff(k_left).pushback(n);
            let lhs = c.jump(m).cutoff(k_left).pushback(n);
            let ok = lhs == base && lhs == base.jump(m) && lhs == d.jump(m).cutoff(k_left as u64).pushback(n).to_config();
            left.record(ok, || format!("{c:?}, n={n}, k={k_left}, m={m}"));
        }
    }
    vec![cut, push, commute, inside, right, left]
}

/// A random compatible pair `(ρ, ρ')` with `ρ' = ρ` minus one particle, and
/// the removed site.
fn random_pair<R: Rng>(rng: &mut R, allow_frontier: bool) -> (BinaryConfig, BinaryConfig, i64) {
    loop {
        let c = random_config(rng, allow_frontier);
        let lo = c.frontier().map_or(-SPAN, |f| f - 3);
        let candidates: Vec<i64> = (lo..=SPAN).filter(|&x| c.occupied(x)).collect();
        if candidates.is_empty() {
            continue;
        }
        let x = candidates[rng.random_range(0..candidates.len())];
        let lower = c.without_particle(x).expect("site is occupied");
        return (c, lower, x);
    }
}

/// How the discrepancy moves under cutoff, pushback, and both, checked
/// against the brute-force diff of the transformed pair.
pub fn check_discrepancy_transforms(cases: u64, seed: u64) -> Vec<IdentityCheck> {
    let mut rng = StreamKey::new(seed, 0).rng(Domain::Identity, 2);
    let mut after_cut = IdentityCheck::new("discrepancy-after-cutoff");
    let mut after_push = IdentityCheck::new("discrepancy-after-pushback");
    let mut after_both = IdentityCheck::new("discrepancy-after-cutoff-pushback");

    for _ in 0..cases {
        let (rho, rho_lower, sigma) = random_pair(&mut rng, true);
        let count = rho.particle_count().unwrap_or(10);
        let k = rng.random_range(1..=count.clamp(1, 10));
        let n = rng.random_range(1..=SPAN);
        let diff = |a: &BinaryConfig, b: &BinaryConfig| dense(a).discrepancy(&dense(b));

        let pi = rho.particle_pos(k).expect("rho has at least k particles");
        let got = diff(&rho.cutoff(k), &rho_lower.cutoff(k - 1));
        after_cut.record(got == Some(sigma.max(pi)), || format!("{rho:?}, Σ={sigma}, k={k}: got {got:?}"));

        let (fin, fin_lower, fin_sigma) = random_pair(&mut rng, false);
        let theta = fin.hole_pos(n, fin.queue_length(n) as usize).expect("enough holes");
        let got = diff(&fin.pushback(n), &fin_lower.pushback(n));
        after_push.record(got == Some(fin_sigma.min(theta)), || format!("{fin:?}, Σ={fin_sigma}, n={n}: got {got:?}"));

        let rk = rho.cutoff(k);
        let theta = rk.hole_pos(n, rk.queue_length(n) as usize).expect("enough holes");
        let got = diff(&rk.pushback(n), &rho_lower.cutoff(k - 1).pushback(n));
        let want = sigma.max(pi).min(theta);
        after_both.record(got == Some(want), || format!("{rho:?}, Σ={sigma}, k={k}, n={n}: got {got:?}, want {want}"));
    }
    vec![after_cut, after_push, after_both]
}

/// Exact discrete-time laws: the two fixed-speed probabilities at `n = 4`
/// after three steps, and inversion symmetry of the variable-speed chain.
pub fn check_discrete_laws() -> Vec<IdentityCheck> {
    let mut named = IdentityCheck::new("fixed-speed-n4-three-steps");
    let law = enumerate_discrete(4, 3, DiscreteSpeed::Fixed).expect("n = 4 is enumerable");
    let third = BigRational::new(1.into(), 3.into());
    let sixth = BigRational::new(1.into(), 6.into());
    named.record(law.prob(&[2, 4, 1, 3]) == third, || format!("P[(2,4,1,3)] = {}", law.prob(&[2, 4, 1, 3])));
    named.record(law.prob(&[3, 1, 4, 2]) == sixth, || format!("P[(3,1,4,2)] = {}", law.prob(&[3, 1, 4, 2])));
    named.record(law.total() == BigRational::from_integer(1.into()), || "total mass".into());

    let mut sym = IdentityCheck::new("variable-speed-inversion-symmetry");
    for n in [3, 4, 5] {
        for steps in 1..=6 {
            let law = enumerate_discrete(n, steps, DiscreteSpeed::Variable).expect("small n");
            sym.record(law.is_inversion_symmetric(), || format!("n={n}, steps={steps}"));
        }
    }
    vec![named, sym]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batches_pass() {
        assert!(check_reversal(200, 1).passed());
        for c in check_operators(300, 1).into_iter().chain(check_discrepancy_transforms(300, 1)) {
            assert!(c.passed(), "{c:?}");
        }
        for c in check_discrete_laws() {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn random_configs_are_canonical() {
        let mut rng = StreamKey::new(0, 0).rng(Domain::Identity, 9);
        for _ in 0..200 {
            let c = random_config(&mut rng, true);
            assert_eq!(dense(&c).to_config(), c);
        }
    }
}
