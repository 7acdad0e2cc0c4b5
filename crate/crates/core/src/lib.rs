//! Dense antichains in the Boolean lattice from a dyadic prefix code.
//!
//! Given a growth sequence `f_n` with `f_{n0} = 1`, `f_n ≤ f_{n+1} ≤ 2 f_n`
//! and `Σ f_n / 2^n ≤ 1/4`, the family built here is an antichain of finite
//! subsets of the positive integers with `|F ∩ 2^[n]| ≥ f_n` for every
//! `n ≥ n0`.
//!
//! Pipeline: [`growth`] validates a sequence and derives the plan tables,
//! [`prefixcode`] produces the codewords, [`antichain`] enumerates, counts and
//! decodes, and [`verify`] issues exact certificates.

pub mod antichain;
pub mod binomial;
pub mod bitstring;
pub mod dyadic;
pub mod growth;
pub mod prefixcode;
pub mod verify;

pub use antichain::{count_exact, decode, enumerate_up_to, Element, LevelCounts};
pub use bitstring::BitString;
pub use dyadic::Dyadic;
pub use growth::{
    build_plan, plan_for_levels, validate, ConstructionPlan, FamilySpec, GrowthSequence,
    PlanOptions, SharedSequence,
};
pub use prefixcode::{codeword, codewords_iter, BlockIndex};
pub use verify::{Certificate, CheckKind, Verdict};
