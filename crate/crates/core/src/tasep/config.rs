//! Configurations with a rightmost particle and the operators acting on them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::perm::Permutation;

/// A 0/1 configuration on `ℤ` with a rightmost particle (or no particles).
///
/// Stored sparsely: every site `<= frontier` is occupied, and `explicit`
/// lists the remaining particles in decreasing order. The canonical form
/// keeps `frontier + 1` empty, so two configurations are equal iff their
/// representations are.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryConfig {
    frontier: Option<i64>,
    explicit: Vec<i64>,
}

impl BinaryConfig {
    pub fn empty() -> Self {
        BinaryConfig::default()
    }

    /// `1_{x <= k}`.
    pub fn step(k: i64) -> Self {
        BinaryConfig { frontier: Some(k), explicit: Vec::new() }
    }

    /// Finitely many particles at the given sites.
    pub fn from_sites<I: IntoIterator<Item = i64>>(sites: I) -> Result<Self> {
        Self::from_parts(None, sites)
    }

    /// Everything `<= frontier` plus the given sites, which must lie above it.
    pub fn from_parts<I: IntoIterator<Item = i64>>(frontier: Option<i64>, sites: I) -> Result<Self> {
        let mut explicit: Vec<i64> = sites.into_iter().collect();
        explicit.sort_unstable_by(|a, b| b.cmp(a));
        if explicit.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate particle site");
        }
        if let (Some(f), Some(&low)) = (frontier, explicit.last()) {
            if low <= f {
                return invalid(format!("site {low} lies inside the frontier {f}"));
            }
        }
        let mut c = BinaryConfig { frontier, explicit };
        c.normalize();
        Ok(c)
    }

    /// `T_k` of the labeled configuration `labels[i]` at site `first + i`.
    pub fn project(labels: &[u32], first: i64, k: u32) -> Self {
        let explicit = labels
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &l)| l <= k)
            .map(|(i, _)| first + i as i64)
            .collect();
        BinaryConfig { frontier: None, explicit }
    }

    /// `T_k σ` with `σ` placed on sites `1..=n`.
    pub fn project_perm(sigma: &Permutation, k: u32) -> Self {
        Self::project(sigma.forward(), 1, k)
    }

    fn normalize(&mut self) {
        if let Some(f) = self.frontier.as_mut() {
            while self.explicit.last() == Some(&(*f + 1)) {
                self.explicit.pop();
                *f += 1;
            }
        }
    }

    pub fn frontier(&self) -> Option<i64> {
        self.frontier
    }

    /// Particles above the frontier, rightmost first.
    pub fn explicit(&self) -> &[i64] {
        &self.explicit
    }

    /// Position of the rightmost particle.
    pub fn right_edge(&self) -> Option<i64> {
        self.explicit.first().copied().or(self.frontier)
    }

    /// Number of particles, `None` if infinite.
    pub fn particle_count(&self) -> Option<usize> {
        self.frontier.is_none().then_some(self.explicit.len())
    }

    pub fn occupied(&self, x: i64) -> bool {
        if self.frontier.is_some_and(|f| x <= f) {
            return true;
        }
        self.explicit.binary_search_by(|p| x.cmp(p)).is_ok()
    }

    /// `S(ρ, x)`: particles strictly right of `x`.
    pub fn queue_length(&self, x: i64) -> u64 {
        let above = self.explicit.partition_point(|&p| p > x) as u64;
        let block = self.frontier.map_or(0, |f| (f - x).max(0) as u64);
        above + block
    }

    /// `π_ρ(j)`: the `j`-th rightmost particle.
    pub fn particle_pos(&self, j: usize) -> Result<i64> {
        if j == 0 {
            return invalid("particle rank starts at 1");
        }
        if j <= self.explicit.len() {
            return Ok(self.explicit[j - 1]);
        }
        match self.frontier {
            Some(f) => Ok(f - (j - self.explicit.len() - 1) as i64),
            None => invalid(format!("only {} particles, asked for rank {j}", self.explicit.len())),
        }
    }

    /// `θ_ρ(n, j)`: the `j`-th rightmost hole in `(-∞, n]`, with `θ(n, 0) = n + 1`.
    pub fn hole_pos(&self, n: i64, j: usize) -> Result<i64> {
        if j == 0 {
            return Ok(n + 1);
        }
        let mut idx = self.explicit.partition_point(|&p| p > n);
        let mut found = 0usize;
        let mut x = n;
        loop {
            if let Some(f) = self.frontier {
                if x <= f {
                    return invalid(format!("only {found} holes left of {}, asked for rank {j}", n + 1));
                }
            } else if idx == self.explicit.len() {
                return Ok(x - (j - found - 1) as i64);
            }
            if idx < self.explicit.len() && self.explicit[idx] == x {
                idx += 1;
            } else {
                found += 1;
                if found == j {
                    return Ok(x);
                }
            }
            x -= 1;
        }
    }

    /// `R_k`: keeps the `k` rightmost particles.
    pub fn cutoff(&self, k: usize) -> Self {
        if k <= self.explicit.len() {
            return BinaryConfig { frontier: None, explicit: self.explicit[..k].to_vec() };
        }
        match self.frontier {
            None => self.clone(),
            Some(f) => {
                let extra = (k - self.explicit.len()) as i64;
                let mut explicit = self.explicit.clone();
                explicit.extend((0..extra).map(|i| f - i));
                BinaryConfig { frontier: None, explicit }
            }
        }
    }

    /// `B_n`: the `j`-th rightmost particle moves from `x` to `x ∧ (n + 1 - j)`.
    pub fn pushback(&self, n: i64) -> Self {
        let explicit: Vec<i64> = self.explicit.iter().enumerate().map(|(i, &x)| x.min(n - i as i64)).collect();
        let frontier = self.frontier.map(|f| f.min(n - self.explicit.len() as i64));
        let mut c = BinaryConfig { frontier, explicit };
        c.normalize();
        c
    }

    /// `J_m`: moves a particle from `m` to `m + 1` if that site is empty.
    pub fn jump(&self, m: i64) -> Self {
        let mut c = self.clone();
        c.jump_in_place(m);
        c
    }

    pub fn jump_in_place(&mut self, m: i64) -> bool {
        if !self.occupied(m) || self.occupied(m + 1) {
            return false;
        }
        match self.frontier {
            Some(f) if m == f => {
                self.frontier = Some(f - 1);
                self.explicit.push(f + 1);
            }
            _ => {
                let idx = self.explicit.binary_search_by(|p| m.cmp(p)).expect("occupied above frontier");
                self.explicit[idx] = m + 1;
            }
        }
        true
    }

    /// Adds a particle at an empty site.
    pub fn with_particle(&self, x: i64) -> Result<Self> {
        if self.occupied(x) {
            return invalid(format!("site {x} is already occupied"));
        }
        let mut explicit = self.explicit.clone();
        let idx = explicit.partition_point(|&p| p > x);
        explicit.insert(idx, x);
        let mut c = BinaryConfig { frontier: self.frontier, explicit };
        c.normalize();
        Ok(c)
    }

    /// Removes the particle at an occupied site.
    pub fn without_particle(&self, x: i64) -> Result<Self> {
        if !self.occupied(x) {
            return invalid(format!("site {x} is empty"));
        }
        let mut c = self.clone();
        match self.frontier {
            Some(f) if x <= f => {
                c.frontier = Some(x - 1);
                c.explicit.extend((x + 1..=f).rev());
            }
            _ => {
                let idx = c.explicit.binary_search_by(|p| x.cmp(p)).expect("occupied");
                c.explicit.remove(idx);
            }
        }
        Ok(c)
    }

    /// Occupied sites above `base`, increasing. `base` must not exceed the frontier.
    fn occupied_above(&self, base: i64) -> Vec<i64> {
        let mut out: Vec<i64> = match self.frontier {
            Some(f) => (base + 1..=f).collect(),
            None => Vec::new(),
        };
        out.extend(self.explicit.iter().rev().filter(|&&p| p > base));
        out
    }

    /// `Σ_{ρ,ρ'}`: the single site where `self` has a particle and `other`
    /// does not, provided the two agree everywhere else.
    pub fn discrepancy(&self, other: &BinaryConfig) -> Result<i64> {
        let base = match (self.frontier, other.frontier) {
            (Some(a), Some(b)) => a.min(b),
            (None, None) => i64::MIN,
            _ => return Err(Error::Incompatible("one configuration is finite, the other is not".into())),
        };
        let mine = self.occupied_above(base);
        let theirs = other.occupied_above(base);
        if mine.len() != theirs.len() + 1 {
            return Err(Error::Incompatible(format!(
                "particle counts above {base} differ by {}",
                mine.len() as i64 - theirs.len() as i64
            )));
        }
        let split = mine.iter().zip(&theirs).position(|(a, b)| a != b).unwrap_or(theirs.len());
        if mine[split + 1..] != theirs[split..] {
            return Err(Error::Incompatible("configurations differ at more than one site".into()));
        }
        Ok(mine[split])
    }

    /// Occupancy of sites `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<bool> {
        (lo..=hi).map(|x| self.occupied(x)).collect()
    }
}

/// A pair of compatible configurations and their discrepancy site.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondClassPair {
    upper: BinaryConfig,
    lower: BinaryConfig,
    site: i64,
}

impl SecondClassPair {
    pub fn new(upper: BinaryConfig, lower: BinaryConfig) -> Result<Self> {
        let site = upper.discrepancy(&lower)?;
        Ok(SecondClassPair { upper, lower, site })
    }

    /// The step pair `(1_{x <= k}, 1_{x <= k-1})`.
    pub fn step(k: i64) -> Self {
        SecondClassPair { upper: BinaryConfig::step(k), lower: BinaryConfig::step(k - 1), site: k }
    }

    pub fn upper(&self) -> &BinaryConfig {
        &self.upper
    }

    pub fn lower(&self) -> &BinaryConfig {
        &self.lower
    }

    /// `Σ`, as maintained by the local rule.
    pub fn site(&self) -> i64 {
        self.site
    }

    /// `Σ` by a full diff of the two configurations.
    pub fn recompute(&self) -> Result<i64> {
        self.upper.discrepancy(&self.lower)
    }

    /// Applies `J_m` to both configurations and moves `Σ` by the
    /// second-class rule: it jumps onto a hole to its right and is
    /// overtaken by a first-class particle from its left.
    pub fn apply_jump(&mut self, m: i64) {
        if self.site == m && !self.upper.occupied(m + 1) {
            self.site = m + 1;
        } else if self.site == m + 1 && self.lower.occupied(m) {
            self.site = m;
        }
        self.upper.jump_in_place(m);
        self.lower.jump_in_place(m);
    }

    /// `(R_k ρ, R_{k-1} ρ')`.
    pub fn cutoff(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return invalid("cutoff of a pair needs k >= 1");
        }
        Self::new(self.upper.cutoff(k), self.lower.cutoff(k - 1))
    }

    /// `(B_n ρ, B_n ρ')`.
    pub fn pushback(&self, n: i64) -> Result<Self> {
        Self::new(self.upper.pushback(n), self.lower.pushback(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(xs: &[i64]) -> BinaryConfig {
        BinaryConfig::from_sites(xs.iter().copied()).unwrap()
    }

    #[test]
    fn projection() {
        assert_eq!(BinaryConfig::project(&[2, 3, 1], 1, 1), sites(&[3]));
        let id = Permutation::identity(6);
        assert_eq!(BinaryConfig::project_perm(&id, 4), sites(&[1, 2, 3, 4]));
    }

    #[test]
    fn cutoff_examples() {
        let rho = sites(&[1, 2, 5]);
        assert_eq!(rho.cutoff(2), sites(&[2, 5]));
        assert_eq!(rho.cutoff(3), rho);
        assert_eq!(rho.cutoff(9), rho);
        assert_eq!(rho.cutoff(0), BinaryConfig::empty());
        assert_eq!(BinaryConfig::step(3).cutoff(2), sites(&[2, 3]));
    }

    #[test]
    fn pushback_examples() {
        assert_eq!(sites(&[2, 5, 7]).pushback(4), sites(&[2, 3, 4]));
        assert_eq!(sites(&[1, 3]).pushback(4), sites(&[1, 3]));
        let c = BinaryConfig::from_parts(Some(0), [3, 9]).unwrap();
        assert_eq!(c.pushback(4), BinaryConfig::from_parts(Some(0), [3, 4]).unwrap());
        assert_eq!(BinaryConfig::step(9).pushback(4), BinaryConfig::step(4));
    }

    #[test]
    fn jump_examples() {
        let rho = sites(&[2, 5]);
        assert_eq!(rho.jump(2), sites(&[3, 5]));
        assert_eq!(rho.jump(1), rho);
        assert_eq!(sites(&[2, 3]).jump(2), sites(&[2, 3]));
        let s = BinaryConfig::step(0).jump(0);
        assert_eq!(s, BinaryConfig::from_parts(Some(-1), [1]).unwrap());
        assert_eq!(s.jump(-1).jump(1).jump(0), BinaryConfig::from_parts(Some(-2), [1, 2]).unwrap());
    }

    #[test]
    fn queue_and_positions() {
        let rho = sites(&[2, 5, 7]);
        assert_eq!(rho.queue_length(4), 2);
        assert_eq!(rho.particle_pos(2).unwrap(), 5);
        assert!(rho.particle_pos(4).is_err());
        let rho = sites(&[2, 5]);
        assert_eq!(rho.hole_pos(6, 0).unwrap(), 7);
        assert_eq!(rho.hole_pos(6, 1).unwrap(), 6);
        assert_eq!(rho.hole_pos(6, 2).unwrap(), 4);
        assert_eq!(rho.hole_pos(6, 3).unwrap(), 3);
        assert_eq!(rho.hole_pos(6, 5).unwrap(), 0);
        let step = BinaryConfig::step(0);
        assert_eq!(step.queue_length(-3), 3);
        assert_eq!(step.particle_pos(4).unwrap(), -3);
        assert_eq!(step.hole_pos(2, 2).unwrap(), 1);
        assert!(step.hole_pos(2, 3).is_err());
    }

    #[test]
    fn canonical_form() {
        let a = BinaryConfig::from_parts(Some(0), [1, 2, 5]).unwrap();
        assert_eq!(a, BinaryConfig::from_parts(Some(2), [5]).unwrap());
        assert!(BinaryConfig::from_parts(Some(3), [2]).is_err());
        assert!(BinaryConfig::from_sites([1, 1]).is_err());
        assert_eq!(a.without_particle(1).unwrap(), BinaryConfig::from_parts(Some(0), [2, 5]).unwrap());
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(sites(&[1, 3]).discrepancy(&sites(&[3])).unwrap(), 1);
        assert!(sites(&[1, 3]).discrepancy(&sites(&[1, 3])).is_err());
        assert!(sites(&[1, 3]).discrepancy(&sites(&[2])).is_err());
        assert!(BinaryConfig::step(0).discrepancy(&sites(&[0])).is_err());
        assert_eq!(BinaryConfig::step(4).discrepancy(&BinaryConfig::step(3)).unwrap(), 4);
        let lower = BinaryConfig::step(4).without_particle(1).unwrap();
        assert_eq!(BinaryConfig::step(4).discrepancy(&lower).unwrap(), 1);
    }

    #[test]
    fn pair_local_rule_matches_diff() {
        let mut pair = SecondClassPair::step(0);
        for m in [0, 1, -1, 0, 1, 2, 0, -1, 1, -2, -1, 0, 3, 2, 1] {
            pair.apply_jump(m);
            assert_eq!(pair.site(), pair.recompute().unwrap(), "after J_{m}");
        }
    }
}
