//! Variable sets as `u32` bitmasks and the canonical ranking of bounded subsets.
//!
//! Bit `j` set means variable `j` is a member. Parent-set domains are always
//! enumerated by (cardinality, then numeric value of the encoding); the
//! ranking functions here are the single source of that order.

use core::fmt;

use crate::math::binomial;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(u32);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    #[inline]
    pub const fn from_bits(bits: u32) -> Self {
        VarSet(bits)
    }

    /// `{0, …, n-1}`.
    #[inline]
    pub const fn full(n: usize) -> Self {
        if n >= 32 {
            VarSet(u32::MAX)
        } else {
            VarSet((1u32 << n) - 1)
        }
    }

    #[inline]
    pub const fn singleton(i: usize) -> Self {
        VarSet(1 << i)
    }

    #[inline]
    pub const fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub const fn with(self, i: usize) -> Self {
        VarSet(self.0 | 1 << i)
    }

    #[inline]
    pub const fn without(self, i: usize) -> Self {
        VarSet(self.0 & !(1 << i))
    }

    #[inline]
    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub const fn is_subset_of(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub const fn union(self, other: VarSet) -> Self {
        VarSet(self.0 | other.0)
    }

    #[inline]
    pub const fn intersection(self, other: VarSet) -> Self {
        VarSet(self.0 & other.0)
    }

    #[inline]
    pub const fn difference(self, other: VarSet) -> Self {
        VarSet(self.0 & !other.0)
    }

    /// Members in increasing order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(VarSet::EMPTY, VarSet::with)
    }
}

impl IntoIterator for VarSet {
    type Item = usize;
    type IntoIter = Members;
    fn into_iter(self) -> Members {
        self.iter()
    }
}

#[derive(Clone, Debug)]
pub struct Members(u32);

impl Iterator for Members {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Members {}

/// Drops bit `i` from `bits` and closes the gap (`bits` must not contain `i`).
#[inline]
pub const fn compress_without(bits: u32, i: usize) -> u32 {
    let low = (1u32 << i) - 1;
    (bits & low) | ((bits >> 1) & !low)
}

/// Inverse of [`compress_without`].
#[inline]
pub const fn expand_without(idx: u32, i: usize) -> u32 {
    let low = (1u32 << i) - 1;
    (idx & low) | ((idx & !low) << 1)
}

/// Software parallel-bit-deposit: scatters the low bits of `src` onto the set
/// bits of `mask`, in order. Monotone in `src`.
#[inline]
pub fn deposit(mut src: u32, mut mask: u32) -> u32 {
    let mut out = 0;
    while mask != 0 && src != 0 {
        let low = mask & mask.wrapping_neg();
        if src & 1 == 1 {
            out |= low;
        }
        src >>= 1;
        mask &= mask - 1;
    }
    out
}

/// Software parallel-bit-extract, inverse of [`deposit`] on subsets of `mask`.
#[inline]
pub fn extract(src: u32, mut mask: u32) -> u32 {
    let mut out = 0;
    let mut bit = 1u32;
    while mask != 0 {
        let low = mask & mask.wrapping_neg();
        if src & low != 0 {
            out |= bit;
        }
        bit <<= 1;
        mask &= mask - 1;
    }
    out
}

/// Next larger integer with the same popcount (Gosper's hack).
#[inline]
pub fn next_same_popcount(x: u32) -> Option<u32> {
    let c = x & x.wrapping_neg();
    let r = x.checked_add(c)?;
    Some((((r ^ x) >> 2) / c) | r)
}

/// Number of subsets of a `universe`-element set with at most `max_size` members.
pub fn bounded_subset_count(universe: u32, max_size: u32) -> usize {
    (0..=max_size.min(universe)).map(|j| binomial(universe, j) as usize).sum()
}

/// Colexicographic rank of `mask` among masks of the same popcount, which is
/// also its rank in numeric order.
#[inline]
pub fn colex_rank(mask: u32) -> u64 {
    let mut r = 0;
    for (t, c) in VarSet(mask).iter().enumerate() {
        r += binomial(c as u32, t as u32 + 1);
    }
    r
}

/// Rank of `mask` (over a `universe`-bit space) in the canonical
/// (size, numeric) order of all subsets with at most `max_size` members.
#[inline]
pub fn bounded_rank(mask: u32, universe: u32) -> usize {
    let size = mask.count_ones();
    let offset: u64 = (0..size).map(|t| binomial(universe, t)).sum();
    (offset + colex_rank(mask)) as usize
}

/// Inverse of [`bounded_rank`].
pub fn bounded_unrank(mut rank: usize, universe: u32, max_size: u32) -> u32 {
    let mut size = 0;
    loop {
        let layer = binomial(universe, size) as usize;
        if rank < layer || size >= max_size.min(universe) {
            break;
        }
        rank -= layer;
        size += 1;
    }
    let mut r = rank as u64;
    let mut mask = 0u32;
    let mut c = universe;
    for t in (1..=size).rev() {
        // largest c with C(c, t) <= r
        while c > 0 && binomial(c - 1, t) > r {
            c -= 1;
        }
        let pos = c - 1;
        mask |= 1 << pos;
        r -= binomial(pos, t);
        c = pos;
    }
    mask
}

/// Canonical enumeration of every subset of the low `universe` bits with at
/// most `max_size` members: by size, then numerically.
pub fn bounded_subsets(universe: u32, max_size: u32) -> BoundedSubsets {
    BoundedSubsets { universe, max_size: max_size.min(universe), size: 0, next: Some(0) }
}

#[derive(Clone, Debug)]
pub struct BoundedSubsets {
    universe: u32,
    max_size: u32,
    size: u32,
    next: Option<u32>,
}

impl Iterator for BoundedSubsets {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let cur = self.next?;
        let limit = if self.universe >= 32 { u64::MAX } else { 1u64 << self.universe };
        let candidate = if cur == 0 { None } else { next_same_popcount(cur) };
        self.next = match candidate {
            Some(x) if (x as u64) < limit => Some(x),
            _ => {
                if self.size < self.max_size {
                    self.size += 1;
                    Some(((1u64 << self.size) - 1) as u32)
                } else {
                    None
                }
            }
        };
        Some(cur)
    }
}

/// Subsets of `within` with at most `max_size` members, in canonical order.
pub fn bounded_subsets_of(within: VarSet, max_size: usize) -> impl Iterator<Item = VarSet> {
    let u = within.bits();
    bounded_subsets(within.len() as u32, max_size as u32).map(move |c| VarSet(deposit(c, u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn compress_round_trip() {
        for i in 0..6 {
            for s in 0u32..64 {
                if s >> i & 1 == 1 {
                    continue;
                }
                let c = compress_without(s, i);
                assert!(c < 32);
                assert_eq!(expand_without(c, i), s);
            }
        }
    }

    #[test]
    fn deposit_extract() {
        let mask = 0b1011_0100;
        for s in 0..16 {
            let d = deposit(s, mask);
            assert_eq!(d & !mask, 0);
            assert_eq!(extract(d, mask), s);
        }
    }

    #[test]
    fn canonical_order_is_size_then_numeric() {
        let all: Vec<u32> = bounded_subsets(5, 3).collect();
        assert_eq!(all.len(), bounded_subset_count(5, 3));
        assert_eq!(all.len(), 1 + 5 + 10 + 10);
        for w in all.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!((a.count_ones(), a) < (b.count_ones(), b));
        }
        for (r, &m) in all.iter().enumerate() {
            assert_eq!(bounded_rank(m, 5), r);
            assert_eq!(bounded_unrank(r, 5, 3), m);
        }
    }

    #[test]
    fn empty_universe() {
        let all: Vec<u32> = bounded_subsets(0, 3).collect();
        assert_eq!(all, [0]);
        assert_eq!(bounded_unrank(0, 0, 0), 0);
    }

    #[test]
    fn subsets_of_within_are_ordered() {
        let u = VarSet::from_iter([1, 3, 4]);
        let got: Vec<u32> = bounded_subsets_of(u, 2).map(VarSet::bits).collect();
        assert_eq!(got, [0, 0b10, 0b1000, 0b1_0000, 0b1010, 0b1_0010, 0b1_1000]);
    }

    #[test]
    fn full_universe_of_31_bits_terminates() {
        assert_eq!(bounded_subsets(31, 1).count(), 32);
    }
}
