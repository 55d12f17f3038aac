//! Permutations of `1..=n` with the sorting operators `S_i`.
//!
//! Positions and labels are 1-based in the public API. A permutation keeps
//! its forward map, its inverse and its ascent set in sync, so the location
//! of any particle and the set of bonds able to fire are O(1) queries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const ABSENT: u32 = u32::MAX;

/// Indexed set of ascent positions `{i : σ(i) < σ(i+1)}`.
///
/// Supports O(1) insert, remove, membership and uniform selection by index.
#[derive(Clone, Debug)]
pub struct AscentSet {
    members: Vec<u32>,
    slot: Vec<u32>,
}

impl AscentSet {
    fn empty(n: usize) -> Self {
        AscentSet { members: Vec::with_capacity(n), slot: vec![ABSENT; n + 1] }
    }

    /// Full recomputation from a forward map (1-based labels, 0-based slice).
    pub fn from_forward(forward: &[u32]) -> Self {
        let mut set = AscentSet::empty(forward.len());
        for i in 1..forward.len() {
            if forward[i - 1] < forward[i] {
                set.insert(i);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.slot.get(i).is_some_and(|&s| s != ABSENT)
    }

    /// The `idx`-th member in internal (unsorted) order.
    pub fn get(&self, idx: usize) -> usize {
        self.members[idx] as usize
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.members.iter().map(|&i| i as usize).collect();
        v.sort_unstable();
        v
    }

    fn insert(&mut self, i: usize) {
        if self.slot[i] == ABSENT {
            self.slot[i] = self.members.len() as u32;
            self.members.push(i as u32);
        }
    }

    fn remove(&mut self, i: usize) {
        let s = self.slot[i];
        if s == ABSENT {
            return;
        }
        let last = *self.members.last().expect("nonempty");
        self.members.swap_remove(s as usize);
        if last as usize != i {
            self.slot[last as usize] = s;
        }
        self.slot[i] = ABSENT;
    }

    fn set(&mut self, i: usize, ascent: bool) {
        if ascent {
            self.insert(i)
        } else {
            self.remove(i)
        }
    }
}

/// A permutation `σ` of `1..=n`; `σ(i)` is the label at position `i`.
#[derive(Clone)]
pub struct Permutation {
    forward: Vec<u32>,
    inverse: Vec<u32>,
    ascents: AscentSet,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let forward: Vec<u32> = (1..=n as u32).collect();
        Self::from_forward_unchecked(forward)
    }

    pub fn reverse(n: usize) -> Self {
        let forward: Vec<u32> = (1..=n as u32).rev().collect();
        Self::from_forward_unchecked(forward)
    }

    /// Builds a permutation from `(σ(1), …, σ(n))`.
    pub fn from_forward(forward: Vec<u32>) -> Result<Self> {
        let n = forward.len();
        if n == 0 {
            return invalid("permutation must have at least one element");
        }
        let mut seen = vec![false; n + 1];
        for &v in &forward {
            let v = v as usize;
            if v == 0 || v > n || seen[v] {
                return invalid(format!("{forward:?} is not a permutation of 1..={n}"));
            }
            seen[v] = true;
        }
        Ok(Self::from_forward_unchecked(forward))
    }

    fn from_forward_unchecked(forward: Vec<u32>) -> Self {
        let mut inverse = vec![0u32; forward.len()];
        for (pos, &label) in forward.iter().enumerate() {
            inverse[label as usize - 1] = pos as u32 + 1;
        }
        let ascents = AscentSet::from_forward(&forward);
        Permutation { forward, inverse, ascents }
    }

    pub fn n(&self) -> usize {
        self.forward.len()
    }

    /// `σ(i)`, the label at position `i`.
    pub fn label_at(&self, position: usize) -> u32 {
        self.forward[position - 1]
    }

    /// `σ⁻¹(k)`, the location of particle `k`.
    pub fn position_of(&self, label: u32) -> usize {
        self.inverse[label as usize - 1] as usize
    }

    pub fn forward(&self) -> &[u32] {
        &self.forward
    }

    pub fn inverse(&self) -> &[u32] {
        &self.inverse
    }

    pub fn ascents(&self) -> &AscentSet {
        &self.ascents
    }

    pub fn has_ascent(&self, i: usize) -> bool {
        self.forward[i - 1] < self.forward[i]
    }

    /// `σ⁻¹` as a permutation in its own right.
    pub fn inverted(&self) -> Permutation {
        Self::from_forward_unchecked(self.inverse.clone())
    }

    pub fn is_reverse(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &v)| v as usize == self.n() - i)
    }

    fn check_bond(&self, i: usize) -> Result<()> {
        if i == 0 || i >= self.n() {
            return invalid(format!("bond {i} outside 1..={}", self.n().saturating_sub(1)));
        }
        Ok(())
    }

    /// Applies `τ_i` unconditionally.
    pub fn swap(&mut self, i: usize) -> Result<()> {
        self.check_bond(i)?;
        self.swap_unchecked(i);
        Ok(())
    }

    /// `σ ↦ σ·S_i` in place. Returns whether the swap happened.
    pub fn sort_at(&mut self, i: usize) -> Result<bool> {
        self.check_bond(i)?;
        Ok(self.sort_at_unchecked(i))
    }

    /// Same as [`Permutation::sort_at`] for a bond already known to be valid.
    #[inline]
    pub fn sort_at_unchecked(&mut self, i: usize) -> bool {
        if self.forward[i - 1] < self.forward[i] {
            self.swap_unchecked(i);
            true
        } else {
            false
        }
    }

    #[inline]
    fn swap_unchecked(&mut self, i: usize) {
        let (a, b) = (self.forward[i - 1], self.forward[i]);
        self.forward.swap(i - 1, i);
        self.inverse[a as usize - 1] = i as u32 + 1;
        self.inverse[b as usize - 1] = i as u32;
        // only bonds i-1, i, i+1 can change status
        let n = self.n();
        for j in i.saturating_sub(1).max(1)..=(i + 1).min(n - 1) {
            let asc = self.forward[j - 1] < self.forward[j];
            self.ascents.set(j, asc);
        }
    }
}

impl PartialEq for Permutation {
    fn eq(&self, other: &Self) -> bool {
        self.forward == other.forward
    }
}

impl Eq for Permutation {}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.forward)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.forward.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let forward = Vec::<u32>::deserialize(d)?;
        Permutation::from_forward(forward).map_err(serde::de::Error::custom)
    }
}

/// `σ·S_i`: sorts positions `i, i+1` into decreasing order.
pub fn apply_sort(sigma: &Permutation, i: usize) -> Result<Permutation> {
    let mut out = sigma.clone();
    out.sort_at(i)?;
    Ok(out)
}

/// `id·S_{i_1}⋯S_{i_k}`, applied left to right.
pub fn sort_sequence(n: usize, seq: &[usize]) -> Result<Permutation> {
    let mut sigma = Permutation::identity(n);
    for &i in seq {
        sigma.sort_at(i)?;
    }
    Ok(sigma)
}

/// Number of pairs `i < j` with `σ(i) > σ(j)`, by merge counting.
pub fn inversion_number(sigma: &Permutation) -> u64 {
    let mut work = sigma.forward.clone();
    let mut buf = vec![0u32; work.len()];
    merge_count(&mut work, &mut buf)
}

fn merge_count(a: &mut [u32], buf: &mut [u32]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = a.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[i] <= a[j] {
            buf[k] = a[i];
            i += 1;
        } else {
            buf[k] = a[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perm(v: &[u32]) -> Permutation {
        Permutation::from_forward(v.to_vec()).unwrap()
    }

    fn naive_inversions(v: &[u32]) -> u64 {
        let mut c = 0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i] > v[j] {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn sort_examples() {
        assert_eq!(apply_sort(&Permutation::identity(3), 1).unwrap(), perm(&[2, 1, 3]));
        assert_eq!(apply_sort(&perm(&[2, 1, 3]), 1).unwrap(), perm(&[2, 1, 3]));
        assert_eq!(sort_sequence(3, &[1, 2]).unwrap(), perm(&[2, 3, 1]));
        assert_eq!(sort_sequence(3, &[2, 1]).unwrap(), perm(&[3, 1, 2]));
        assert_eq!(sort_sequence(3, &[]).unwrap(), Permutation::identity(3));
    }

    #[test]
    fn out_of_range_bond_rejected() {
        let id = Permutation::identity(3);
        assert!(apply_sort(&id, 0).is_err());
        assert!(apply_sort(&id, 3).is_err());
        assert!(sort_sequence(3, &[1, 5]).is_err());
    }

    #[test]
    fn invalid_forward_rejected() {
        assert!(Permutation::from_forward(vec![1, 1, 2]).is_err());
        assert!(Permutation::from_forward(vec![0, 1]).is_err());
        assert!(Permutation::from_forward(vec![]).is_err());
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(inversion_number(&Permutation::identity(7)), 0);
        assert_eq!(inversion_number(&Permutation::reverse(5)), 10);
        assert_eq!(inversion_number(&perm(&[2, 4, 1, 3])), 3);
    }

    #[test]
    fn inverse_and_positions() {
        let p = perm(&[3, 1, 4, 2]);
        assert_eq!(p.position_of(4), 3);
        assert_eq!(p.inverted(), perm(&[2, 4, 1, 3]));
        assert_eq!(p.ascents().sorted(), vec![2]);
        assert!(Permutation::reverse(4).is_reverse());
    }

    proptest! {
        #[test]
        fn reversal_identity(n in 2usize..=12, raw in prop::collection::vec(0usize..1000, 0..=60)) {
            let seq: Vec<usize> = raw.iter().map(|r| 1 + r % (n - 1)).collect();
            let rev: Vec<usize> = seq.iter().rev().copied().collect();
            let a = sort_sequence(n, &seq).unwrap();
            let b = sort_sequence(n, &rev).unwrap();
            prop_assert_eq!(a, b.inverted());
        }

        #[test]
        fn sort_increments_inversions_by_one(n in 2usize..=10, raw in prop::collection::vec(0usize..1000, 0..=40)) {
            let mut sigma = Permutation::identity(n);
            let mut inv = 0;
            for r in raw {
                let i = 1 + r % (n - 1);
                let acted = sigma.sort_at(i).unwrap();
                let next = inversion_number(&sigma);
                prop_assert_eq!(next, inv + acted as u64);
                inv = next;
                prop_assert_eq!(sigma.ascents().sorted(), AscentSet::from_forward(sigma.forward()).sorted());
                for k in 1..=n as u32 {
                    prop_assert_eq!(sigma.label_at(sigma.position_of(k)), k);
                }
            }
        }

        #[test]
        fn merge_count_matches_naive(v in Just((1..=40u32).collect::<Vec<_>>()).prop_shuffle()) {
            prop_assert_eq!(inversion_number(&perm(&v)), naive_inversions(&v));
        }
    }
}
