//! Finite binary strings, 1-indexed, doubling as finite subsets of ℕ.
//!
//! A string `x_1 x_2 … x_len` corresponds to the set `{j : x_j = 1}`. String
//! equality and ordering look at the bits *and* the length; the set view
//! ([`BitString::same_set`], [`BitString::is_subset_of`]) ignores trailing zeros.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::dyadic::Dyadic;
use num_bigint::BigUint;
use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseBitStringError {
    #[error("invalid character {0:?} in bit string (expected '0' or '1')")]
    InvalidChar(char),
}

/// Binary string stored as little-endian `u64` words; bit `j` (1-indexed)
/// lives at word `(j-1)/64`, bit `(j-1)%64`. Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    /// All-zero string of the given length.
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    /// All-ones string of the given length.
    pub fn ones(len: usize) -> Self {
        let mut s = Self::zeros(len);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.clear_tail();
        s
    }

    /// String of length `len` with ones exactly at `positions` (1-indexed).
    ///
    /// Panics if a position is 0 or exceeds `len`.
    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::zeros(len);
        for p in positions {
            s.set(p, true);
        }
        s
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut s = Self::default();
        for b in bits {
            s.push(b);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 1-indexed position `pos`; positions past the end read as 0.
    pub fn get(&self, pos: usize) -> bool {
        assert!(pos >= 1, "bit positions are 1-indexed");
        if pos > self.len {
            return false;
        }
        let j = pos - 1;
        (self.words[j / WORD] >> (j % WORD)) & 1 == 1
    }

    pub fn set(&mut self, pos: usize, value: bool) {
        assert!(
            pos >= 1 && pos <= self.len,
            "position {pos} outside 1..={}",
            self.len
        );
        let j = pos - 1;
        let mask = 1u64 << (j % WORD);
        if value {
            self.words[j / WORD] |= mask;
        } else {
            self.words[j / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, pos: usize) {
        let v = self.get(pos);
        self.set(pos, !v);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len, value);
    }

    /// Copy truncated or zero-padded to `len`.
    pub fn resized(&self, len: usize) -> Self {
        let mut out = Self::zeros(len);
        let keep = len.div_ceil(WORD).min(self.words.len());
        out.words[..keep].copy_from_slice(&self.words[..keep]);
        out.clear_tail();
        out
    }

    /// First `k` bits.
    pub fn prefix(&self, k: usize) -> Self {
        assert!(k <= self.len);
        self.resized(k)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of ones strictly after position `pos`.
    pub fn count_ones_after(&self, pos: usize) -> usize {
        self.positions().filter(|&p| p > pos).count()
    }

    /// Positions of the ones, ascending.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t + 1)
            })
        })
    }

    /// Largest position holding a one, i.e. `max` of the set view.
    pub fn max_position(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(wi, &w)| wi * WORD + (WORD - w.leading_zeros() as usize))
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    /// First 1-indexed position where both strings are defined and differ.
    pub fn first_difference(&self, other: &BitString) -> Option<usize> {
        let common = self.len.min(other.len);
        for (wi, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let diff = a ^ b;
            if diff != 0 {
                let pos = wi * WORD + diff.trailing_zeros() as usize + 1;
                return (pos <= common).then_some(pos);
            }
        }
        None
    }

    /// Set containment, ignoring trailing zeros.
    pub fn is_subset_of(&self, other: &BitString) -> bool {
        self.words.iter().enumerate().all(|(i, &w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    /// Set equality, ignoring trailing zeros.
    pub fn same_set(&self, other: &BitString) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    /// `Σ x_j / 2^j`, held at exponent `len`.
    pub fn value(&self) -> Dyadic {
        Dyadic::new(self.to_msb_integer(), self.len as u32)
    }

    /// Bits read as a `len`-bit integer with position 1 most significant.
    pub fn to_msb_integer(&self) -> BigUint {
        let mut n = BigUint::default();
        for p in self.positions() {
            n.set_bit((self.len - p) as u64, true);
        }
        n
    }

    /// Inverse of [`BitString::to_msb_integer`]; `value` must fit in `len` bits.
    pub fn from_msb_integer(value: &BigUint, len: usize) -> Self {
        debug_assert!(value.bits() as usize <= len);
        let mut s = Self::zeros(len);
        for j in 0..len {
            if value.bit(j as u64) {
                s.set(len - j, true);
            }
        }
        s
    }

    /// Set notation, e.g. `{1,3,4}`.
    pub fn to_set_string(&self) -> String {
        let items: Vec<String> = self.positions().map(|p| p.to_string()).collect();
        format!("{{{}}}", items.join(","))
    }

    /// Raw words; bits past `len` are zero.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

/// Lexicographic order: at the first differing position the string with 0
/// is smaller; a proper prefix sorts before its extensions.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.first_difference(other) {
            Some(p) => self.get(p).cmp(&other.get(p)),
            None => self.len.cmp(&other.len),
        }
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 1..=self.len {
            f.write_str(if self.get(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::default();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(ParseBitStringError::InvalidChar(other)),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_display_and_positions() {
        let x = bs("1011");
        assert_eq!(x.to_string(), "1011");
        assert_eq!(x.positions().collect::<Vec<_>>(), vec![1, 3, 4]);
        assert_eq!(x.to_set_string(), "{1,3,4}");
        assert_eq!(x.max_position(), Some(4));
        assert_eq!(BitString::zeros(7).max_position(), None);
        assert!("10a".parse::<BitString>().is_err());
    }

    #[test]
    fn lex_order_matches_first_difference_rule() {
        assert!(bs("100") < bs("101"));
        assert!(bs("011") < bs("100"));
        assert!(bs("10") < bs("100"));
        assert_eq!(bs("0101").first_difference(&bs("0100")), Some(4));
        assert_eq!(bs("10").first_difference(&bs("100")), None);
    }

    #[test]
    fn set_view_ignores_trailing_zeros() {
        assert!(bs("101").same_set(&bs("10100")));
        assert!(bs("1").is_subset_of(&bs("11")));
        assert!(!bs("11").is_subset_of(&bs("1")));
        assert!(BitString::default().is_subset_of(&bs("0")));
    }

    #[test]
    fn wide_strings_cross_word_boundaries() {
        let x = BitString::from_positions(130, [1, 64, 65, 130]);
        assert_eq!(x.positions().collect::<Vec<_>>(), vec![1, 64, 65, 130]);
        assert_eq!(x.max_position(), Some(130));
        assert_eq!(x.prefix(64).count_ones(), 2);
        assert_eq!(BitString::ones(70).count_ones(), 70);
        let y = x.resized(200);
        assert!(x.same_set(&y));
        assert!(x.is_prefix_of(&y));
        assert_eq!(x.count_ones_after(64), 2);
    }

    #[test]
    fn value_reads_binary_fraction() {
        assert_eq!(bs("0101").value(), Dyadic::new(5u32.into(), 4));
        assert_eq!(bs("11").value(), Dyadic::new(3u32.into(), 2));
    }

    proptest! {
        #[test]
        fn msb_integer_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..150)) {
            let x = BitString::from_bits(bits.iter().copied());
            let back = BitString::from_msb_integer(&x.to_msb_integer(), x.len());
            prop_assert_eq!(&back, &x);
            let parsed: BitString = x.to_string().parse().unwrap();
            prop_assert_eq!(parsed, x);
        }

        #[test]
        fn ord_agrees_with_vec_bool(a in proptest::collection::vec(any::<bool>(), 0..80),
                                    b in proptest::collection::vec(any::<bool>(), 0..80)) {
            let x = BitString::from_bits(a.iter().copied());
            let y = BitString::from_bits(b.iter().copied());
            prop_assert_eq!(x.cmp(&y), a.cmp(&b));
        }
    }
}
