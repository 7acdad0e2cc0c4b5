//! Exact nonnegative dyadic rationals `m / 2^e`.
//!
//! Values keep the exponent they were built with (no automatic reduction), so
//! reading the first `k` binary digits of a value held at exponent `k` is a
//! plain numerator read. Equality and ordering compare values, not
//! representations.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bitstring::BitString;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DyadicError {
    #[error("subtraction underflow: {minuend} - {subtrahend} is negative")]
    Underflow { minuend: String, subtrahend: String },
    #[error("binary digits requested for {0}, outside (0, 1]")]
    OutOfUnitInterval(String),
    #[error("cannot parse dyadic {0:?} (expected \"m/2^e\" or an integer)")]
    Parse(String),
}

#[derive(Clone, Debug, Default)]
pub struct Dyadic {
    numerator: BigUint,
    exponent: u32,
}

impl Dyadic {
    pub fn new(numerator: BigUint, exponent: u32) -> Self {
        Dyadic {
            numerator,
            exponent,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Dyadic::new(BigUint::one(), 0)
    }

    pub fn from_integer(n: impl Into<BigUint>) -> Self {
        Dyadic::new(n.into(), 0)
    }

    /// `1 / 2^k`.
    pub fn pow2_neg(k: u32) -> Self {
        Dyadic::new(BigUint::one(), k)
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Same value held at exponent `e`. Panics if `e` is below the current exponent.
    pub fn widened(&self, e: u32) -> Self {
        assert!(e >= self.exponent, "cannot widen 2^-{} to 2^-{e}", self.exponent);
        Dyadic::new(&self.numerator << (e - self.exponent), e)
    }

    /// Smallest-exponent representation (odd numerator, or `0/2^0`).
    pub fn reduced(&self) -> Self {
        if self.numerator.is_zero() {
            return Dyadic::zero();
        }
        let tz = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exponent as u64) as u32;
        Dyadic::new(&self.numerator >> shift, self.exponent - shift)
    }

    pub fn checked_sub(&self, other: &Dyadic) -> Result<Dyadic, DyadicError> {
        let e = self.exponent.max(other.exponent);
        let (a, b) = (self.widened(e), other.widened(e));
        if b.numerator > a.numerator {
            return Err(DyadicError::Underflow {
                minuend: self.to_string(),
                subtrahend: other.to_string(),
            });
        }
        Ok(Dyadic::new(a.numerator - b.numerator, e))
    }

    /// Product with a nonnegative integer, keeping the exponent.
    pub fn scaled(&self, factor: &BigUint) -> Self {
        Dyadic::new(&self.numerator * factor, self.exponent)
    }

    /// `floor(self · 2^k)`.
    pub fn floor_scaled(&self, k: u32) -> BigUint {
        if k >= self.exponent {
            &self.numerator << (k - self.exponent)
        } else {
            &self.numerator >> (self.exponent - k)
        }
    }

    /// Lossy conversion for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        let r = self.reduced();
        let bits = r.numerator.bits();
        // keep 64 significant bits
        let shift = bits.saturating_sub(64);
        let top = (&r.numerator >> shift)
            .iter_u64_digits()
            .next()
            .unwrap_or(0) as f64;
        top * 2f64.powi(shift as i32 - r.exponent as i32)
    }

    /// Exact value of a finite nonnegative `f64`.
    pub fn from_f64_exact(x: f64) -> Option<Dyadic> {
        if !x.is_finite() || x < 0.0 {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let m = BigUint::from(mantissa);
        Some(if exp >= 0 {
            Dyadic::new(m << exp as u64, 0)
        } else {
            Dyadic::new(m, (-exp) as u32)
        })
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let a = &self.numerator << (e - self.exponent);
        let b = &other.numerator << (e - other.exponent);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exponent.max(rhs.exponent);
        Dyadic::new(
            (&self.numerator << (e - self.exponent)) + (&rhs.numerator << (e - rhs.exponent)),
            e,
        )
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        if rhs.exponent <= self.exponent {
            self.numerator += &rhs.numerator << (self.exponent - rhs.exponent);
        } else {
            self.numerator <<= rhs.exponent - self.exponent;
            self.numerator += &rhs.numerator;
            self.exponent = rhs.exponent;
        }
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

/// Reduced form, `m/2^e`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        write!(f, "{}/2^{}", r.numerator, r.exponent)
    }
}

impl FromStr for Dyadic {
    type Err = DyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DyadicError::Parse(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            None => Ok(Dyadic::from_integer(
                s.parse::<BigUint>().map_err(|_| bad())?,
            )),
            Some((m, rest)) => {
                let e = rest.trim().strip_prefix("2^").ok_or_else(bad)?;
                let m = m.trim().parse::<BigUint>().map_err(|_| bad())?;
                let e = e.trim().parse::<u32>().map_err(|_| bad())?;
                Ok(Dyadic::new(m, e))
            }
        }
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// First `k` binary digits of `x ∈ (0, 1]`.
///
/// For `x < 1` this is the truncation of `x` to `k` places; `x = 1` uses the
/// expansion `0.111…` and yields all ones.
pub fn binary_digits(x: &Dyadic, k: u32) -> Result<BitString, DyadicError> {
    if x.is_zero() || *x > Dyadic::one() {
        return Err(DyadicError::OutOfUnitInterval(x.to_string()));
    }
    if *x == Dyadic::one() {
        return Ok(BitString::ones(k as usize));
    }
    Ok(BitString::from_msb_integer(&x.floor_scaled(k), k as usize))
}

/// Exact `Σ 2^{-len}` over a multiset of word lengths.
pub fn kraft_sum(lengths: impl IntoIterator<Item = u32>) -> Dyadic {
    let lengths: Vec<u32> = lengths.into_iter().collect();
    let Some(&e) = lengths.iter().max() else {
        return Dyadic::zero();
    };
    let mut numerator = BigUint::zero();
    for len in lengths {
        numerator += BigUint::one() << (e - len);
    }
    Dyadic::new(numerator, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(m: u64, e: u32) -> Dyadic {
        Dyadic::new(BigUint::from(m), e)
    }

    #[test]
    fn subtraction_examples() {
        let three_quarters = Dyadic::one().checked_sub(&d(1, 2)).unwrap();
        assert_eq!(three_quarters, d(3, 2));
        assert_eq!(three_quarters.checked_sub(&d(1, 3)).unwrap(), d(5, 3));
        assert!(matches!(
            d(1, 3).checked_sub(&d(1, 2)),
            Err(DyadicError::Underflow { .. })
        ));
    }

    #[test]
    fn equality_is_value_wise() {
        assert_eq!(d(2, 3), d(1, 2));
        assert_eq!(d(0, 9), Dyadic::zero());
        assert_eq!(d(12, 4).reduced().exponent(), 2);
        assert_eq!(d(12, 4).to_string(), "3/2^2");
        assert_eq!(Dyadic::zero().to_string(), "0/2^0");
    }

    #[test]
    fn digits_of_worked_example_values() {
        assert_eq!(binary_digits(&d(3, 2), 2).unwrap().to_string(), "11");
        assert_eq!(binary_digits(&d(5, 4), 4).unwrap().to_string(), "0101");
        assert_eq!(binary_digits(&Dyadic::one(), 3).unwrap().to_string(), "111");
        assert!(binary_digits(&Dyadic::zero(), 3).is_err());
        assert!(binary_digits(&d(5, 2), 3).is_err());
    }

    #[test]
    fn kraft_sum_examples() {
        assert_eq!(kraft_sum([]), Dyadic::zero());
        assert_eq!(kraft_sum([1, 2]), d(3, 2));
        let lengths = std::iter::repeat_n(2, 1)
            .chain(std::iter::repeat_n(3, 3))
            .chain(std::iter::repeat_n(4, 5));
        // 1/4 + 3/8 + 5/16, summed over a common denominator
        let expected = Dyadic::new(BigUint::from(4u32 + 6 + 5), 4);
        assert_eq!(kraft_sum(lengths), expected);
        assert_eq!(expected.to_string(), "15/2^4");
    }

    #[test]
    fn parse_round_trip_and_errors() {
        assert_eq!("15/2^4".parse::<Dyadic>().unwrap(), d(15, 4));
        assert_eq!("3".parse::<Dyadic>().unwrap(), d(3, 0));
        assert!("3/4".parse::<Dyadic>().is_err());
        assert!("x/2^4".parse::<Dyadic>().is_err());
    }

    #[test]
    fn float_conversions() {
        assert_eq!(Dyadic::from_f64_exact(0.375).unwrap(), d(3, 3));
        assert_eq!(Dyadic::from_f64_exact(6.0).unwrap(), d(6, 0));
        assert!(Dyadic::from_f64_exact(-1.0).is_none());
        assert_eq!(d(5, 3).to_f64(), 0.625);
        let huge = Dyadic::new(BigUint::one() << 300u32, 298);
        assert_eq!(huge.to_f64(), 4.0);
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (any::<u64>(), 0u32..80).prop_map(|(m, e)| d(m, e))
    }

    proptest! {
        #[test]
        fn sub_then_add_round_trips(a in arb_dyadic(), b in arb_dyadic()) {
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            let diff = hi.checked_sub(&lo).unwrap();
            prop_assert_eq!(&diff + &lo, hi.clone());
            prop_assert_eq!(hi.checked_sub(&Dyadic::zero()).unwrap(), hi);
        }

        #[test]
        fn digits_truncate_within_one_ulp(m in 1u64.., e in 0u32..70, k in 1u32..100) {
            // map into (0, 1]
            let x = Dyadic::new(BigUint::from(m), e + 64);
            let digits = binary_digits(&x, k).unwrap();
            prop_assert_eq!(digits.len(), k as usize);
            let v = digits.value();
            prop_assert!(v <= x);
            let gap = x.checked_sub(&v).unwrap();
            prop_assert!(gap < Dyadic::pow2_neg(k));
            if x.reduced().exponent() <= k {
                prop_assert_eq!(v, x);
            }
        }

        #[test]
        fn kraft_sum_is_permutation_invariant(mut lens in proptest::collection::vec(1u32..40, 0..30)) {
            let before = kraft_sum(lens.iter().copied());
            lens.reverse();
            let half = lens.len() / 2;
            lens.rotate_left(half);
            prop_assert_eq!(kraft_sum(lens.iter().copied()), before);
        }
    }
}
