//! Exact laws of the discrete-time swap chains for small `n`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::perm::Permutation;

pub const MAX_EXACT_N: usize = 7;

/// How the next bond is chosen in discrete time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteSpeed {
    /// Uniform bond in `1..n`; `S_i` is a no-op on descents.
    Variable,
    /// Uniform bond among the current ascents.
    Fixed,
}

/// Exact distribution over permutations, keyed by the forward map.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLaw {
    pub n: usize,
    pub steps: usize,
    pub probs: BTreeMap<Vec<u32>, BigRational>,
}

impl ExactLaw {
    pub fn prob(&self, forward: &[u32]) -> BigRational {
        self.probs.get(forward).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.probs.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Whether `P[σ] = P[σ⁻¹]` for every state.
    pub fn is_inversion_symmetric(&self) -> bool {
        self.probs.iter().all(|(fwd, p)| {
            let inv = Permutation::from_forward(fwd.clone()).expect("valid state").inverted();
            &self.prob(inv.forward()) == p
        })
    }
}

/// Exact law after `steps` steps of the discrete-time chain started at the identity.
pub fn enumerate_discrete(n: usize, steps: usize, speed: DiscreteSpeed) -> Result<ExactLaw> {
    if !(2..=MAX_EXACT_N).contains(&n) {
        return invalid(format!("exact enumeration needs 2 <= n <= {MAX_EXACT_N}, got {n}"));
    }
    let mut law: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    law.insert(Permutation::identity(n).forward().to_vec(), BigRational::one());
    let bond_weight = BigRational::new(BigInt::one(), BigInt::from(n - 1));

    for _ in 0..steps {
        let mut next: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (fwd, p) in &law {
            let sigma = Permutation::from_forward(fwd.clone()).expect("valid state");
            match speed {
                DiscreteSpeed::Variable => {
                    let share = p * &bond_weight;
                    for i in 1..n {
                        let mut s = sigma.clone();
                        s.sort_at_unchecked(i);
                        *next.entry(s.forward().to_vec()).or_insert_with(BigRational::zero) += &share;
                    }
                }
                DiscreteSpeed::Fixed => {
                    let asc = sigma.ascents().sorted();
                    if asc.is_empty() {
                        *next.entry(fwd.clone()).or_insert_with(BigRational::zero) += p;
                        continue;
                    }
                    let share = p / BigRational::from_integer(BigInt::from(asc.len()));
                    for i in asc {
                        let mut s = sigma.clone();
                        s.sort_at_unchecked(i);
                        *next.entry(s.forward().to_vec()).or_insert_with(BigRational::zero) += &share;
                    }
                }
            }
        }
        law = next;
    }
    Ok(ExactLaw { n, steps, probs: law })
}
