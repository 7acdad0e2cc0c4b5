//! The family `F = ⋃ F_{k,i}`: streaming enumeration, exact level counts, and
//! membership decoding.
//!
//! `F_{k,i}` holds the strings of length `ℓ_k` that start with `c_{k,i}`, have
//! exactly `i` ones after position `k`, and (for `k > k0`) a one after
//! position `ℓ_{k-1}`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::binomial::binomial_row;
use crate::bitstring::BitString;
use crate::growth::ConstructionPlan;
use crate::prefixcode::{codewords_iter, BlockIndex, CodeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AntichainError {
    #[error("plan reaches level {max_level}, level {n} needs more blocks (raise k_max)")]
    InsufficientPlan { n: u32, max_level: u32 },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("plan tables are inconsistent: {0}")]
    Inconsistent(String),
}

/// A member of `F_{k,i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub bits: BitString,
    pub block: BlockIndex,
}

#[derive(Serialize)]
struct ElementJson<'a> {
    k: u32,
    i: u32,
    set: &'a [usize],
}

impl Element {
    pub fn to_json_line(&self) -> String {
        let set: Vec<usize> = self.bits.positions().collect();
        serde_json::to_string(&ElementJson {
            k: self.block.k,
            i: self.block.i,
            set: &set,
        })
        .expect("element serializes")
    }
}

/// Elements of one block inside `2^[n]`, suffixes in increasing lexicographic order.
pub struct BlockElements {
    block: BlockIndex,
    base: BitString,
    /// Free positions are `k+1 ..= k+window`; a combination index `t` means position `k+window-t`.
    window: usize,
    /// Indices `t < fresh` lie after `ℓ_{k-1}`; `None` when there is no such requirement.
    fresh: Option<usize>,
    combo: Vec<usize>,
    done: bool,
}

impl BlockElements {
    fn new(plan: &ConstructionPlan, block: BlockIndex, prefix: BitString, n: u32) -> Self {
        let BlockIndex { k, i } = block;
        let ell = plan.ell(k);
        let window = (n.min(ell) as usize).saturating_sub(k as usize);
        let fresh = (k > plan.k0())
            .then(|| (k as usize + window).saturating_sub(plan.ell_before(k) as usize));
        let i = i as usize;
        let empty = i == 0 || i > window || fresh == Some(0);
        BlockElements {
            block,
            base: prefix.resized((ell as usize).max(k as usize)),
            window,
            fresh,
            combo: (0..i).collect(),
            done: empty,
        }
    }

    /// Colex successor; walks the `i`-subsets of the window in increasing
    /// numeric order of the suffix read with position `k+1` most significant.
    /// The smallest index stays below `fresh`, so only admissible sets appear.
    fn advance(&mut self) {
        let len = self.combo.len();
        for j in 0..len {
            let mut limit = if j + 1 < len {
                self.combo[j + 1]
            } else {
                self.window
            };
            if j == 0 {
                limit = limit.min(self.fresh.unwrap_or(usize::MAX));
            }
            if self.combo[j] + 1 < limit {
                self.combo[j] += 1;
                for (t, c) in self.combo[..j].iter_mut().enumerate() {
                    *c = t;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for BlockElements {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        if self.done {
            return None;
        }
        let mut bits = self.base.clone();
        let top = self.block.k as usize + self.window;
        for &t in &self.combo {
            bits.set(top - t, true);
        }
        self.advance();
        Some(Element {
            bits,
            block: self.block,
        })
    }
}

/// `F_{k,i} ∩ 2^[n]`.
pub fn enumerate_block(
    plan: &ConstructionPlan,
    block: BlockIndex,
    n: u32,
) -> Result<BlockElements, AntichainError> {
    let prefix = crate::prefixcode::codeword(plan, block)?;
    Ok(BlockElements::new(plan, block, prefix, n))
}

/// Block enumeration with a caller-supplied prefix in place of `c_{k,i}`.
pub fn enumerate_block_with_prefix(
    plan: &ConstructionPlan,
    block: BlockIndex,
    prefix: BitString,
    n: u32,
) -> BlockElements {
    BlockElements::new(plan, block, prefix, n)
}

/// Blocks that can meet `2^[n]`: all `(k, i)` with `ℓ_{k-1} < n`.
fn blocks_meeting(plan: &ConstructionPlan, n: u32) -> impl Iterator<Item = BlockIndex> + '_ {
    plan.blocks()
        .take_while(move |b| plan.ell_before(b.k) < n)
}

/// `F ∩ 2^[n]` in `(k, i)` order, then canonical suffix order.
pub fn enumerate_up_to(plan: &ConstructionPlan, n: u32) -> Result<FamilyElements, AntichainError> {
    if !plan.covers_level(n) {
        return Err(AntichainError::InsufficientPlan {
            n,
            max_level: plan.max_level(),
        });
    }
    let last_k = blocks_meeting(plan, n).last().map_or(plan.k0(), |b| b.k);
    let mut codewords = Vec::new();
    for item in codewords_iter(plan, last_k) {
        codewords.push(item?);
    }
    Ok(enumerate_with_codewords(plan, codewords, n))
}

/// Family enumeration over an explicit `(block, codeword)` list.
pub fn enumerate_with_codewords(
    plan: &ConstructionPlan,
    codewords: Vec<(BlockIndex, BitString)>,
    n: u32,
) -> FamilyElements {
    let codewords: Vec<_> = codewords
        .into_iter()
        .filter(|(b, _)| plan.ell_before(b.k) < n)
        .collect();
    FamilyElements {
        plan: plan.clone(),
        codewords: codewords.into_iter(),
        n,
        current: None,
    }
}

pub struct FamilyElements {
    plan: ConstructionPlan,
    codewords: std::vec::IntoIter<(BlockIndex, BitString)>,
    n: u32,
    current: Option<BlockElements>,
}

impl Iterator for FamilyElements {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        loop {
            if let Some(e) = self.current.as_mut().and_then(Iterator::next) {
                return Some(e);
            }
            let (block, prefix) = self.codewords.next()?;
            self.current = Some(BlockElements::new(&self.plan, block, prefix, self.n));
        }
    }
}

fn pow2_signed(e: i64, what: &str) -> Result<BigInt, AntichainError> {
    if e < 0 {
        return Err(AntichainError::Inconsistent(format!(
            "negative exponent in {what}"
        )));
    }
    Ok(BigInt::one() << e as u64)
}

/// `|F ∩ 2^[n]|` by the block recurrence
/// `N(n) = N(ℓ_{k-1}) + 2^{n-k} - 2^{ℓ_{k-1}-k}` for `n ∈ (ℓ_{k-1}, ℓ_k]`, `N(k0) = 0`.
pub fn count_exact(plan: &ConstructionPlan, n: u32) -> Result<BigUint, AntichainError> {
    if n <= plan.k0() {
        return Ok(BigUint::zero());
    }
    if !plan.covers_level(n) {
        return Err(AntichainError::InsufficientPlan {
            n,
            max_level: plan.max_level(),
        });
    }
    let mut total = BigInt::zero();
    for k in plan.k0()..=plan.k_max() {
        let before = plan.ell_before(k) as i64;
        if before >= n as i64 {
            break;
        }
        let top = (n.min(plan.ell(k))) as i64;
        total += pow2_signed(top - k as i64, "2^(n-k)")?;
        total -= pow2_signed(before - k as i64, "2^(l_(k-1)-k)")?;
    }
    match total.sign() {
        Sign::Minus => Err(AntichainError::Inconsistent(format!(
            "recurrence gives a negative count at n = {n}"
        ))),
        _ => Ok(total.magnitude().clone()),
    }
}

/// `|F ∩ 2^[n]|` as `Σ_k Σ_{i ≤ a_k} [C(m, i) - C(w, i)]` with
/// `m = min(n, ℓ_k) - k`, `w = ℓ_{k-1} - k` (no subtrahend at `k0`).
pub fn count_by_blocks(plan: &ConstructionPlan, n: u32) -> Result<BigUint, AntichainError> {
    if n <= plan.k0() {
        return Ok(BigUint::zero());
    }
    if !plan.covers_level(n) {
        return Err(AntichainError::InsufficientPlan {
            n,
            max_level: plan.max_level(),
        });
    }
    let mut total = BigUint::zero();
    for k in plan.k0()..=plan.k_max() {
        let before = plan.ell_before(k);
        if before >= n {
            break;
        }
        let a = plan.block_size(k) as u64;
        let m = (n.min(plan.ell(k)) as u64).saturating_sub(k as u64);
        let full = binomial_row(m, a);
        let old = if k == plan.k0() {
            vec![BigUint::zero(); a as usize + 1]
        } else {
            binomial_row((before as u64).saturating_sub(k as u64).min(m), a)
        };
        for i in 1..=a as usize {
            total += &full[i] - &old[i];
        }
    }
    Ok(total)
}

/// `2^{n-k} - 1` for the block `k` with `n ∈ (ℓ_{k-1}, ℓ_k]`.
pub fn level_lower_bound(plan: &ConstructionPlan, n: u32) -> Option<BigUint> {
    let k = plan.block_for_level(n)?;
    Some((BigUint::one() << (n - k)) - 1u32)
}

/// Exact `|F ∩ 2^[n]|` for consecutive `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCounts {
    first: u32,
    counts: Vec<BigUint>,
}

impl LevelCounts {
    pub fn new(first: u32, counts: Vec<BigUint>) -> Self {
        LevelCounts { first, counts }
    }

    pub fn compute(plan: &ConstructionPlan, first: u32, last: u32) -> Result<Self, AntichainError> {
        let counts = (first..=last)
            .map(|n| count_exact(plan, n))
            .collect::<Result<_, _>>()?;
        Ok(LevelCounts { first, counts })
    }

    pub fn first(&self) -> u32 {
        self.first
    }

    pub fn last(&self) -> Option<u32> {
        (!self.counts.is_empty()).then(|| self.first + self.counts.len() as u32 - 1)
    }

    pub fn get(&self, n: u32) -> Option<&BigUint> {
        n.checked_sub(self.first)
            .and_then(|j| self.counts.get(j as usize))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &BigUint)> {
        self.counts
            .iter()
            .enumerate()
            .map(move |(j, c)| (self.first + j as u32, c))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// The block containing `set`, or `None` if `set ∉ F` (within the planned range).
pub fn decode(plan: &ConstructionPlan, set: &BitString) -> Option<BlockIndex> {
    let max = set.max_position()? as u32;
    let k0 = plan.k0();
    // prefix bits 1..k as an integer, position 1 most significant
    let mut prefix = BigUint::zero();
    for p in 1..k0 {
        prefix = (prefix << 1u32) + u32::from(set.get(p as usize));
    }
    for k in k0..=plan.k_max().min(max - 1) {
        prefix = (prefix << 1u32) + u32::from(set.get(k as usize));
        // i = 2^k (1 - s_{k-1}) - prefix
        let room = (BigUint::one() << k) - plan.kraft_before(k).floor_scaled(k).min(BigUint::one() << k);
        if prefix > room {
            continue;
        }
        let i = room - &prefix;
        if i.is_zero() || i > BigUint::from(plan.block_size(k)) {
            continue;
        }
        let i: u32 = i.try_into().expect("bounded by a_k");
        let block = BlockIndex { k, i };
        let ones_after = set.count_ones_after(k as usize) as u32;
        let reaches_new = k == k0 || max > plan.ell_before(k);
        return (ones_after == i && reaches_new && max <= plan.ell(k)).then_some(block);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::{build_plan, ConstantFamily, PlanOptions};
    use crate::prefixcode::codeword;

    fn constant_plan(k_max: u32) -> ConstructionPlan {
        build_plan(&ConstantFamily::new(3), k_max, PlanOptions::default()).unwrap()
    }

    fn worked_example() -> ConstructionPlan {
        ConstructionPlan::from_block_sizes(2, &[1, 3, 5]).unwrap()
    }

    fn set(items: &[usize]) -> BitString {
        let len = items.iter().copied().max().unwrap_or(0);
        BitString::from_positions(len, items.iter().copied())
    }

    /// All strings of length ℓ_k filtered by conditions (1)–(3) and max ≤ n.
    fn brute_block(plan: &ConstructionPlan, b: BlockIndex, n: u32) -> Vec<BitString> {
        let ell = plan.ell(b.k) as usize;
        let c = codeword(plan, b).unwrap();
        let mut out = Vec::new();
        for mask in 0u64..(1 << ell) {
            let bits = BitString::from_bits((0..ell).map(|j| (mask >> (ell - 1 - j)) & 1 == 1));
            let ok = bits.prefix(b.k as usize) == c
                && bits.count_ones_after(b.k as usize) == b.i as usize
                && (b.k == plan.k0()
                    || bits.positions().any(|p| p > plan.ell_before(b.k) as usize))
                && bits.max_position().is_none_or(|m| m <= n as usize);
            if ok {
                out.push(bits);
            }
        }
        out
    }

    #[test]
    fn block_examples() {
        let plan = constant_plan(6);
        let got: Vec<_> = enumerate_block(&plan, BlockIndex { k: 3, i: 1 }, 4)
            .unwrap()
            .map(|e| e.bits)
            .collect();
        assert_eq!(got, vec!["1011".parse().unwrap()]);
        assert_eq!(got[0].to_set_string(), "{1,3,4}");
        assert_eq!(enumerate_block(&plan, BlockIndex { k: 5, i: 1 }, 4).unwrap().count(), 0);

        let example = worked_example();
        let got: Vec<String> = enumerate_block(&example, BlockIndex { k: 2, i: 1 }, 3)
            .unwrap()
            .map(|e| e.bits.to_string())
            .collect();
        assert_eq!(got, ["111"]);
    }

    #[test]
    fn blocks_match_brute_force_in_order() {
        let example = worked_example();
        for b in example.blocks() {
            for n in 3..=9 {
                let got: Vec<BitString> = enumerate_block(&example, b, n).unwrap().map(|e| e.bits).collect();
                let mut want = brute_block(&example, b, n);
                want.sort_by_key(|x| x.to_string());
                assert_eq!(got, want, "block {b} n {n}");
            }
        }
    }

    #[test]
    fn family_examples() {
        let plan = constant_plan(8);
        let sets: Vec<String> = enumerate_up_to(&plan, 5)
            .unwrap()
            .map(|e| e.bits.to_set_string())
            .collect();
        assert_eq!(sets, ["{1,2,3}", "{1,3,4}", "{1,4,5}"]);
        assert_eq!(enumerate_up_to(&plan, 3).unwrap().count(), 1);
        for n in 3..=9 {
            assert_eq!(count_exact(&plan, n).unwrap(), BigUint::from(n - 2));
        }
        let example = worked_example();
        assert_eq!(enumerate_up_to(&example, 3).unwrap().count(), 1);
        assert_eq!(
            BigUint::from(enumerate_up_to(&example, 4).unwrap().count()),
            count_exact(&example, 4).unwrap()
        );
        assert!(matches!(
            enumerate_up_to(&plan, 40),
            Err(AntichainError::InsufficientPlan { .. })
        ));
    }

    #[test]
    fn counts_agree_across_routes() {
        let example = worked_example();
        for n in 1..=9 {
            let enumerated = BigUint::from(enumerate_up_to(&example, n).unwrap().count());
            assert_eq!(count_exact(&example, n).unwrap(), enumerated, "n {n}");
            assert_eq!(count_by_blocks(&example, n).unwrap(), enumerated, "n {n}");
        }
        // base block complete at ℓ_{k0}
        assert_eq!(count_exact(&example, 3).unwrap(), BigUint::from(1u32));
        let other = ConstructionPlan::from_block_sizes(3, &[4, 4]).unwrap();
        assert_eq!(count_exact(&other, 7).unwrap(), BigUint::from(15u32));
        assert_eq!(enumerate_up_to(&other, 7).unwrap().count(), 15);
    }

    #[test]
    fn decode_examples() {
        let plan = constant_plan(8);
        assert_eq!(decode(&plan, &set(&[1, 3, 4])), Some(BlockIndex { k: 3, i: 1 }));
        assert_eq!(decode(&plan, &set(&[])), None);
        assert_eq!(decode(&plan, &set(&[1, 2, 3, 4])), None);
        assert_eq!(decode(&plan, &set(&[1, 2, 3])), Some(BlockIndex { k: 2, i: 1 }));
    }

    #[test]
    fn decode_inverts_enumeration_and_rejects_the_rest() {
        let example = worked_example();
        let members: Vec<Element> = enumerate_up_to(&example, 9).unwrap().collect();
        for e in &members {
            assert_eq!(decode(&example, &e.bits), Some(e.block));
        }
        let accepted = (1u32..1 << 9)
            .filter(|&mask| {
                let s = BitString::from_positions(9, (1..=9).filter(|p| mask >> (p - 1) & 1 == 1));
                decode(&example, &s).is_some()
            })
            .count();
        assert_eq!(accepted, members.len());
    }

    #[test]
    fn json_line_format() {
        let e = Element {
            bits: "1011".parse().unwrap(),
            block: BlockIndex { k: 3, i: 1 },
        };
        assert_eq!(e.to_json_line(), r#"{"k":3,"i":1,"set":[1,3,4]}"#);
    }

    #[test]
    fn level_counts_accessors() {
        let plan = constant_plan(10);
        let counts = LevelCounts::compute(&plan, 3, 10).unwrap();
        assert_eq!(counts.get(6), Some(&BigUint::from(4u32)));
        assert_eq!(counts.last(), Some(10));
        assert_eq!(level_lower_bound(&plan, 6), Some(BigUint::one()));
    }
}
