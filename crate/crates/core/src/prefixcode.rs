//! The lexicographically decreasing prefix code `c_{k,i}`.
//!
//! Two independent routes produce the same words: [`codeword`] reads the
//! first `k` binary digits of `1 - s_{k-1} - i/2^k`, while [`codewords_iter`]
//! starts from 1 and subtracts `2^-k` once per word.

use std::fmt;

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::bitstring::BitString;
use crate::dyadic::{binary_digits, Dyadic};
use crate::growth::ConstructionPlan;

/// `(k, i)`: codeword `c_{k,i}` and block `F_{k,i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BlockIndex {
    pub k: u32,
    pub i: u32,
}

impl fmt::Display for BlockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} i={}", self.k, self.i)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("block index ({k},{i}) is not in the plan")]
    InvalidIndex { k: u32, i: u32 },
    #[error("codeword ({k},{i}) has nonpositive value 1 - s_(k-1) - i/2^k; the plan's Kraft sum is too large")]
    NonPositive { k: u32, i: u32 },
}

/// Closed form: first `k` digits of `1 - s_{k-1} - i/2^k`.
pub fn codeword(plan: &ConstructionPlan, idx: BlockIndex) -> Result<BitString, CodeError> {
    let BlockIndex { k, i } = idx;
    if k < plan.k0() || k > plan.k_max() || i == 0 || i > plan.block_size(k) {
        return Err(CodeError::InvalidIndex { k, i });
    }
    let value = codeword_value(plan, idx).ok_or(CodeError::NonPositive { k, i })?;
    Ok(binary_digits(&value, k).expect("value lies in (0, 1)"))
}

/// `1 - s_{k-1} - i/2^k`, or `None` when it is not positive.
pub fn codeword_value(plan: &ConstructionPlan, idx: BlockIndex) -> Option<Dyadic> {
    let v = Dyadic::one()
        .checked_sub(&plan.kraft_before(idx.k))
        .ok()?
        .checked_sub(&Dyadic::new(BigUint::from(idx.i), idx.k))
        .ok()?;
    (!v.is_zero()).then_some(v)
}

/// Iterative route over all blocks with `k ≤ k_max`, in `(k, i)` order.
///
/// Stops after yielding the first error.
pub fn codewords_iter(plan: &ConstructionPlan, k_max: u32) -> Codewords<'_> {
    let k_max = k_max.min(plan.k_max());
    let mut it = Codewords {
        plan,
        k_max,
        next: None,
        value: Dyadic::one(),
    };
    it.next = it.first_from(plan.k0());
    it
}

pub struct Codewords<'a> {
    plan: &'a ConstructionPlan,
    k_max: u32,
    next: Option<BlockIndex>,
    value: Dyadic,
}

impl Codewords<'_> {
    fn first_from(&self, k: u32) -> Option<BlockIndex> {
        (k..=self.k_max)
            .find(|&k| self.plan.block_size(k) > 0)
            .map(|k| BlockIndex { k, i: 1 })
    }
}

impl Iterator for Codewords<'_> {
    type Item = Result<(BlockIndex, BitString), CodeError>;

    fn next(&mut self) -> Option<Self::Item> {
        let idx = self.next?;
        self.next = if idx.i < self.plan.block_size(idx.k) {
            Some(BlockIndex {
                k: idx.k,
                i: idx.i + 1,
            })
        } else {
            self.first_from(idx.k + 1)
        };
        let step = Dyadic::pow2_neg(idx.k);
        match self.value.widened(idx.k.max(self.value.exponent())).checked_sub(&step) {
            Ok(v) if !v.is_zero() => {
                let word = binary_digits(&v, idx.k).expect("value lies in (0, 1)");
                self.value = v;
                Some(Ok((idx, word)))
            }
            _ => {
                self.next = None;
                Some(Err(CodeError::NonPositive { k: idx.k, i: idx.i }))
            }
        }
    }
}

/// First pair where one word is an initial segment of another (or repeats
/// it), as `(ancestor, descendant)`. Words are scanned in order; the witness
/// involves the earliest word that clashes with something before it.
pub fn check_prefix_free(words: &[BitString]) -> Option<(BitString, BitString)> {
    // binary trie; child 0 means "absent" since the root is never a child
    let mut children: Vec<[u32; 2]> = vec![[0, 0]];
    let mut terminal: Vec<Option<usize>> = vec![None];
    for (j, w) in words.iter().enumerate() {
        let mut node = 0usize;
        for p in 1..=w.len() {
            if let Some(a) = terminal[node] {
                return Some((words[a].clone(), w.clone()));
            }
            let b = w.get(p) as usize;
            if children[node][b] == 0 {
                children.push([0, 0]);
                terminal.push(None);
                children[node][b] = (children.len() - 1) as u32;
            }
            node = children[node][b] as usize;
        }
        if let Some(a) = terminal[node] {
            return Some((words[a].clone(), w.clone()));
        }
        if children[node] != [0, 0] {
            let mut d = node;
            let longer = loop {
                if let Some(a) = terminal[d] {
                    break a;
                }
                let [c0, c1] = children[d];
                d = if c0 != 0 { c0 } else { c1 } as usize;
            };
            return Some((w.clone(), words[longer].clone()));
        }
        terminal[node] = Some(j);
    }
    None
}

/// First adjacent pair `(earlier, later)` that is not strictly decreasing, where
/// "decreasing" means the strings first differ at a position where the
/// earlier one has 1 and the later one 0. Adjacent pairs suffice: this order
/// is transitive and rules out prefix relations between non-adjacent words.
pub fn check_reverse_lex(words: &[BitString]) -> Option<(BitString, BitString)> {
    words.windows(2).find_map(|pair| {
        let (a, b) = (&pair[0], &pair[1]);
        match a.first_difference(b) {
            Some(p) if a.get(p) && !b.get(p) => None,
            _ => Some((a.clone(), b.clone())),
        }
    })
}

/// First entry whose word is not the `k`-digit expansion of `1 - s_{k-1} - i/2^k`.
pub fn check_codeword_values(
    plan: &ConstructionPlan,
    entries: &[(BlockIndex, BitString)],
) -> Option<(BlockIndex, BitString)> {
    entries
        .iter()
        .find(|(idx, word)| {
            word.len() != idx.k as usize
                || codeword_value(plan, *idx).is_none_or(|v| word.value() != v)
        })
        .cloned()
}

/// One line of the codeword dump: the word, optionally prefixed by `k,i,`.
pub fn dump_line(idx: BlockIndex, word: &BitString, annotate: bool) -> String {
    if annotate {
        format!("{},{},{}", idx.k, idx.i, word)
    } else {
        word.to_string()
    }
}
