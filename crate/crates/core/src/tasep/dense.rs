//! Dense reference implementation of the configuration operators.
//!
//! Every operator here is evaluated site by site from its pointwise
//! definition in terms of `S(ρ, x)`, with no shortcuts. It is slow and
//! exists to cross-check [`BinaryConfig`](super::BinaryConfig).

use super::config::BinaryConfig;

/// Occupancy on `lo..lo+bits.len()`; sites below `lo` are all occupied when
/// `left_fill` is set and all empty otherwise, sites above the window are empty.
#[derive(Clone, Debug)]
pub struct Dense {
    pub lo: i64,
    pub left_fill: bool,
    pub bits: Vec<bool>,
}

impl Dense {
    pub fn from_config(c: &BinaryConfig, lo: i64, hi: i64) -> Self {
        let lo = match c.frontier() {
            Some(f) => lo.min(f),
            None => lo.min(c.explicit().last().copied().unwrap_or(lo)),
        };
        let hi = hi.max(c.right_edge().unwrap_or(hi));
        Dense { lo, left_fill: c.frontier().is_some(), bits: c.window(lo, hi) }
    }

    pub fn to_config(&self) -> BinaryConfig {
        let frontier = self.left_fill.then_some(self.lo - 1);
        let sites = self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.lo + i as i64);
        BinaryConfig::from_parts(frontier, sites).expect("window sites lie above lo - 1")
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.bits.len() as i64 - 1
    }

    pub fn get(&self, x: i64) -> bool {
        if x < self.lo {
            self.left_fill
        } else {
            self.bits.get((x - self.lo) as usize).copied().unwrap_or(false)
        }
    }

    /// `Σ_{y > x} ρ(y)`, summed site by site.
    pub fn s(&self, x: i64) -> u64 {
        let mut total = 0;
        let mut y = self.hi();
        while y > x {
            total += self.get(y) as u64;
            y -= 1;
        }
        total
    }

    fn build(lo: i64, hi: i64, left_fill: bool, f: impl Fn(i64) -> bool) -> Self {
        Dense { lo, left_fill, bits: (lo..=hi).map(f).collect() }
    }

    fn count(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// `(R_k ρ)(x) = ρ(x)` if `S(ρ, x) < k`, else 0.
    pub fn cutoff(&self, k: u64) -> Self {
        let lo = self.lo - k as i64 - 1;
        Self::build(lo, self.hi(), false, |x| self.get(x) && self.s(x) < k)
    }

    /// `(B_n ρ)(x)` is 0 for `x > n`, 1 if `S(ρ, x) > n - x`, else `ρ(x)`.
    pub fn pushback(&self, n: i64) -> Self {
        let lo = self.lo.min(n - self.count() as i64 - 1);
        let hi = self.hi().max(lo);
        Self::build(lo, hi, self.left_fill, |x| {
            if x > n {
                false
            } else if self.s(x) as i64 > n - x {
                true
            } else {
                self.get(x)
            }
        })
    }

    /// `J_m`: transposes sites `m, m+1` when they hold a particle and a hole.
    pub fn jump(&self, m: i64) -> Self {
        let lo = self.lo.min(m);
        let hi = self.hi().max(m + 1);
        let acts = self.get(m) && !self.get(m + 1);
        Self::build(lo, hi, self.left_fill, |x| {
            if acts && x == m {
                false
            } else if acts && x == m + 1 {
                true
            } else {
                self.get(x)
            }
        })
    }

    /// `π(j)` by scanning right to left.
    pub fn particle_pos(&self, j: usize) -> Option<i64> {
        let mut seen = 0;
        let mut x = self.hi();
        while x >= self.lo - j as i64 - 1 {
            if self.get(x) {
                seen += 1;
                if seen == j {
                    return Some(x);
                }
            }
            x -= 1;
        }
        None
    }

    /// `θ(n, j)` by scanning the holes of `ρ ∨ 1_{[n+1, ∞)}` right to left.
    pub fn hole_pos(&self, n: i64, j: usize) -> Option<i64> {
        if j == 0 {
            return Some(n + 1);
        }
        let mut seen = 0;
        let mut x = n;
        while x >= self.lo.min(n) - j as i64 - 1 {
            if !self.get(x) {
                seen += 1;
                if seen == j {
                    return Some(x);
                }
            }
            x -= 1;
        }
        None
    }

    /// The unique site where `self` is 1 and `other` is 0, if the rest agrees.
    pub fn discrepancy(&self, other: &Dense) -> Option<i64> {
        if self.left_fill != other.left_fill {
            return None;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let diffs: Vec<i64> = (lo..=hi).filter(|&x| self.get(x) != other.get(x)).collect();
        match diffs[..] {
            [x] if self.get(x) => Some(x),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let c = BinaryConfig::from_parts(Some(-3), [0, 2, 3, 9]).unwrap();
        let d = Dense::from_config(&c, -10, 12);
        assert_eq!(d.to_config(), c);
        assert_eq!(d.s(1), c.queue_length(1));
        assert_eq!(d.s(-6), c.queue_length(-6));
    }

    #[test]
    fn hand_examples() {
        let c = BinaryConfig::from_sites([2, 5, 7]).unwrap();
        let d = Dense::from_config(&c, 0, 10);
        assert_eq!(d.pushback(4).to_config(), BinaryConfig::from_sites([2, 3, 4]).unwrap());
        assert_eq!(d.cutoff(2).to_config(), BinaryConfig::from_sites([5, 7]).unwrap());
        assert_eq!(d.particle_pos(2), Some(5));
        let d = Dense::from_config(&BinaryConfig::from_sites([2, 5]).unwrap(), 0, 10);
        assert_eq!(d.hole_pos(6, 3), Some(3));
    }
}
