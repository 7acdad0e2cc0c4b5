//! Growth sequences `f_n` and the construction plan derived from them.
//!
//! A [`GrowthSequence`] yields `f_n` for `n ≥ n0` and can bound the tail
//! `Σ_{n>N} f_n/2^n` exactly, which is what makes the infinite-sum hypothesis
//! checkable at a finite horizon. [`ConstructionPlan`] holds the tables
//! `ℓ_k`, `a_k = ℓ_k - k` and `s_k = Σ a_j/2^j` that drive codeword and block
//! generation.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::prefixcode::BlockIndex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrowthError {
    #[error("f_{n} requested below the start index n0 = {n0}")]
    BelowStart { n: u32, n0: u32 },
    #[error("f_{n} is beyond the table (last row n = {last}) and the table has no extension rule")]
    BeyondTable { n: u32, last: u32 },
    #[error("sequence table, line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("infeasible growth family: {0}")]
    Infeasible(String),
    #[error("normalization precondition failed: {0}")]
    NormalizePrecondition(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error("k_max = {k_max} is below k0 = {k0}")]
    KMaxBelowStart { k_max: u32, k0: u32 },
    #[error("n0 = {0} is too small to start a construction (need n0 >= 2)")]
    StartTooSmall(u32),
    #[error(
        "scan for l_{k} passed n = {reached} without finding its end; \
         f_n/2^n does not decay as the tail certificate claims ({reason})"
    )]
    ScanDiverged { k: u32, reached: u32, reason: String },
    #[error("plan invariant violated: {0}")]
    Invariant(String),
}

/// Provider of a growth sequence `(f_n)_{n ≥ n0}`.
///
/// Implementations must be pure: the same `n` always yields the same value.
pub trait GrowthSequence: Send + Sync + fmt::Debug {
    fn n0(&self) -> u32;

    fn value(&self, n: u32) -> Result<BigUint, GrowthError>;

    /// Exact upper bound on `Σ_{n > after} f_n / 2^n`.
    fn tail_bound(&self, after: u32) -> Result<Dyadic, GrowthError>;

    /// Last index at which values were summed directly when the tail
    /// certificate was produced.
    fn checked_through(&self) -> u32;

    /// Last index with a defined value, if the sequence is not total.
    fn available_through(&self) -> Option<u32> {
        None
    }

    fn describe(&self) -> String;

    /// Certified bound on the full series `Σ_{n ≥ n0} f_n / 2^n`.
    fn tail_certificate(&self) -> Result<TailCertificate, GrowthError> {
        let through = self.checked_through().max(self.n0());
        let partial = partial_sum(self, self.n0(), through)?;
        let tail = self.tail_bound(through)?;
        Ok(TailCertificate {
            checked_through: through,
            total: &partial + &tail,
            partial_sum: partial,
            tail_bound: tail,
        })
    }
}

pub type SharedSequence = Arc<dyn GrowthSequence>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TailCertificate {
    pub checked_through: u32,
    pub partial_sum: Dyadic,
    pub tail_bound: Dyadic,
    pub total: Dyadic,
}

/// Exact `Σ_{from ≤ n ≤ to} f_n / 2^n`.
pub fn partial_sum<S: GrowthSequence + ?Sized>(
    seq: &S,
    from: u32,
    to: u32,
) -> Result<Dyadic, GrowthError> {
    let mut acc = Dyadic::new(BigUint::zero(), to);
    for n in from..=to {
        acc += &Dyadic::new(seq.value(n)?, n);
    }
    Ok(acc)
}

/// `f_n = 1` for all `n ≥ n0`. Valid exactly when `n0 ≥ 3`.
#[derive(Debug, Clone)]
pub struct ConstantFamily {
    n0: u32,
}

impl ConstantFamily {
    pub fn new(n0: u32) -> Self {
        ConstantFamily { n0 }
    }
}

impl GrowthSequence for ConstantFamily {
    fn n0(&self) -> u32 {
        self.n0
    }

    fn value(&self, n: u32) -> Result<BigUint, GrowthError> {
        if n < self.n0 {
            return Err(GrowthError::BelowStart { n, n0: self.n0 });
        }
        Ok(BigUint::one())
    }

    fn tail_bound(&self, after: u32) -> Result<Dyadic, GrowthError> {
        // Σ_{n > m} 2^-n = 2^-m
        Ok(Dyadic::pow2_neg(after.max(self.n0.saturating_sub(1))))
    }

    fn checked_through(&self) -> u32 {
        self.n0
    }

    fn describe(&self) -> String {
        format!("constant f_n = 1, n0 = {}", self.n0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TableTail {
    /// `f_n = f_last` beyond the table.
    Constant,
    /// Declared bound on `Σ_{n > last} f_n / 2^n`; values past the table are undefined.
    Bound(Dyadic),
}

/// Finite table of consecutive values plus an extension rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSequence {
    n0: u32,
    values: Vec<BigUint>,
    tail: TableTail,
}

impl TableSequence {
    pub fn new(n0: u32, values: Vec<BigUint>, tail: TableTail) -> Result<Self, GrowthError> {
        if values.is_empty() {
            return Err(GrowthError::Table {
                line: 0,
                message: "table has no rows".into(),
            });
        }
        Ok(TableSequence { n0, values, tail })
    }

    pub fn last_index(&self) -> u32 {
        self.n0 + self.values.len() as u32 - 1
    }

    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn tail(&self) -> &TableTail {
        &self.tail
    }

    /// Parse the `n,f_n` CSV format with a `#extend=constant` or
    /// `#tail_bound=m/2^e` footer. Rows must be consecutive in `n`.
    pub fn parse_csv(text: &str) -> Result<Self, GrowthError> {
        let err = |line: usize, message: String| GrowthError::Table { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, header)) if header.replace(' ', "") == "n,f_n" => {}
            Some((line, other)) => {
                return Err(err(line, format!("expected header `n,f_n`, found `{other}`")))
            }
            None => return Err(err(0, "empty table".into())),
        }
        let mut n0 = None;
        let mut values = Vec::new();
        let mut tail = None;
        for (line, text) in lines {
            if tail.is_some() {
                return Err(err(line, "content after the footer directive".into()));
            }
            if let Some(directive) = text.strip_prefix('#') {
                tail = Some(match directive.split_once('=') {
                    Some(("extend", "constant")) => TableTail::Constant,
                    Some(("tail_bound", bound)) => TableTail::Bound(
                        bound.parse().map_err(|e| err(line, format!("{e}")))?,
                    ),
                    _ => return Err(err(line, format!("unknown directive `#{directive}`"))),
                });
                continue;
            }
            let (n, f) = text
                .split_once(',')
                .ok_or_else(|| err(line, format!("expected `n,f_n`, found `{text}`")))?;
            let n: u32 = n
                .trim()
                .parse()
                .map_err(|_| err(line, format!("bad index `{}`", n.trim())))?;
            let f: BigUint = f
                .trim()
                .parse()
                .map_err(|_| err(line, format!("bad value `{}`", f.trim())))?;
            match n0 {
                None => n0 = Some(n),
                Some(start) => {
                    let expected = start + values.len() as u32;
                    if n != expected {
                        return Err(err(
                            line,
                            format!("rows must be consecutive: expected n = {expected}, found {n}"),
                        ));
                    }
                }
            }
            values.push(f);
        }
        let n0 = n0.ok_or_else(|| err(0, "table has no rows".into()))?;
        let tail = tail.ok_or_else(|| {
            err(
                0,
                "missing footer: `#extend=constant` or `#tail_bound=m/2^e`".into(),
            )
        })?;
        TableSequence::new(n0, values, tail)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,f_n\n");
        for (j, f) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.n0 + j as u32, f));
        }
        match &self.tail {
            TableTail::Constant => out.push_str("#extend=constant\n"),
            TableTail::Bound(b) => out.push_str(&format!("#tail_bound={b}\n")),
        }
        out
    }
}

impl GrowthSequence for TableSequence {
    fn n0(&self) -> u32 {
        self.n0
    }

    fn value(&self, n: u32) -> Result<BigUint, GrowthError> {
        if n < self.n0 {
            return Err(GrowthError::BelowStart { n, n0: self.n0 });
        }
        match self.values.get((n - self.n0) as usize) {
            Some(v) => Ok(v.clone()),
            None => match self.tail {
                TableTail::Constant => Ok(self.values.last().unwrap().clone()),
                TableTail::Bound(_) => Err(GrowthError::BeyondTable {
                    n,
                    last: self.last_index(),
                }),
            },
        }
    }

    fn tail_bound(&self, after: u32) -> Result<Dyadic, GrowthError> {
        let after = after.max(self.n0 - 1);
        let last = self.last_index();
        let beyond = match &self.tail {
            // Σ_{n > m} f_last 2^-n = f_last 2^-m
            TableTail::Constant => {
                Dyadic::new(self.values.last().unwrap().clone(), after.max(last))
            }
            TableTail::Bound(b) => b.clone(),
        };
        if after >= last {
            return Ok(beyond);
        }
        Ok(&partial_sum(self, after + 1, last)? + &beyond)
    }

    fn checked_through(&self) -> u32 {
        self.last_index()
    }

    fn available_through(&self) -> Option<u32> {
        match self.tail {
            TableTail::Constant => None,
            TableTail::Bound(_) => Some(self.last_index()),
        }
    }

    fn describe(&self) -> String {
        format!(
            "table n0 = {}, {} rows, {}",
            self.n0,
            self.values.len(),
            match &self.tail {
                TableTail::Constant => "constant extension".to_string(),
                TableTail::Bound(b) => format!("tail bound {b}"),
            }
        )
    }
}

/// Seeded random valid table: `n0 ∈ [4, 7]`, 4–40 rows, constant extension.
///
/// Each step draws `f_{n+1}` uniformly from `[f_n, min(2 f_n, budget)]`, where
/// the budget keeps `Σ f_m/2^m + f_{n+1}/2^n ≤ 1/4` (the certified total if the
/// table stopped there).
pub fn random_table(seed: u64) -> TableSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0: u32 = rng.gen_range(4..=7);
    let rows: u32 = rng.gen_range(4..=40);
    let quarter = Dyadic::pow2_neg(2);
    let mut values = vec![BigUint::one()];
    let mut partial = Dyadic::pow2_neg(n0);
    for n in n0..n0 + rows - 1 {
        let prev = values.last().unwrap().clone();
        let room = quarter
            .checked_sub(&partial)
            .expect("budget invariant keeps partial sum below 1/4");
        // f_{n+1} (1/2^{n+1} + 1/2^{n+1}) ≤ room
        let budget = room.floor_scaled(n);
        let hi = (&prev * 2u32).min(budget).max(prev.clone());
        let lo = prev.to_u64().unwrap();
        let hi = hi.to_u64().unwrap();
        let next = BigUint::from(rng.gen_range(lo..=hi));
        partial += &Dyadic::new(next.clone(), n + 1);
        values.push(next);
    }
    TableSequence::new(n0, values, TableTail::Constant).expect("nonempty table")
}

/// `f_n ≈ c · 2^n / (n · (log₂ n)^{1+ε})` with `c = 2^-scale_log2`, started at
/// `f_{n0} = 1` and clamped so that `f_n ≤ f_{n+1} ≤ 2 f_n`.
///
/// Values are exact integers: the density `c / (n (log₂ n)^{1+ε})` is
/// evaluated in `f64`, and `f_n` is derived from the exact dyadic value of
/// that float. The tail past the anchor is bounded by the integral
/// `c · ln 2 / (ε (log₂ N)^ε)` with a relative margin of 1e-6.
pub struct CorollaryFamily {
    epsilon: f64,
    scale_log2: u32,
    n0: u32,
    anchor: u32,
    values: Mutex<Vec<BigUint>>,
}

const TAIL_MARGIN: f64 = 1.0 + 1e-6;
const GROWTH_SLOPE_MARGIN: f64 = 0.05;

impl CorollaryFamily {
    fn with_params(epsilon: f64, scale_log2: u32, n0: u32) -> Self {
        CorollaryFamily {
            epsilon,
            scale_log2,
            n0,
            anchor: n0,
            values: Mutex::new(vec![BigUint::one()]),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The scaling constant is `2^-scale_log2`.
    pub fn scale_log2(&self) -> u32 {
        self.scale_log2
    }

    /// Index from which `f_n ≤ ⌊q_n 2^n⌋` holds and the unscaled formula increases.
    pub fn anchor(&self) -> u32 {
        self.anchor
    }

    fn density(epsilon: f64, scale_log2: u32, n: u32) -> f64 {
        let n = n as f64;
        2f64.powi(-(scale_log2 as i32)) / (n * n.log2().powf(1.0 + epsilon))
    }

    /// `⌊q_n · 2^n⌋` where `q_n` is the float density.
    fn raw(epsilon: f64, scale_log2: u32, n: u32) -> BigUint {
        Dyadic::from_f64_exact(Self::density(epsilon, scale_log2, n))
            .expect("density is finite and positive")
            .floor_scaled(n)
    }

    /// `2^x / (x (log₂ x)^{1+ε})` is increasing on `[x, ∞)` with slack.
    fn formula_increasing_from(epsilon: f64, x: u32) -> bool {
        let x = x as f64;
        x * std::f64::consts::LN_2 > 1.0 + (1.0 + epsilon) / x.ln() + GROWTH_SLOPE_MARGIN
    }

    fn analytic_tail(&self, after: u32) -> Dyadic {
        let c = 2f64.powi(-(self.scale_log2 as i32));
        let bound = c * std::f64::consts::LN_2
            / (self.epsilon * (after as f64).log2().powf(self.epsilon))
            * TAIL_MARGIN;
        Dyadic::from_f64_exact(bound).expect("tail bound is finite")
    }
}

impl fmt::Debug for CorollaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorollaryFamily")
            .field("epsilon", &self.epsilon)
            .field("scale_log2", &self.scale_log2)
            .field("n0", &self.n0)
            .field("anchor", &self.anchor)
            .finish()
    }
}

impl GrowthSequence for CorollaryFamily {
    fn n0(&self) -> u32 {
        self.n0
    }

    fn value(&self, n: u32) -> Result<BigUint, GrowthError> {
        if n < self.n0 {
            return Err(GrowthError::BelowStart { n, n0: self.n0 });
        }
        let mut values = self.values.lock().unwrap();
        while values.len() <= (n - self.n0) as usize {
            let m = self.n0 + values.len() as u32;
            let prev = values.last().unwrap();
            let raw = Self::raw(self.epsilon, self.scale_log2, m);
            let next = raw.max(prev.clone()).min(prev * 2u32);
            values.push(next);
        }
        Ok(values[(n - self.n0) as usize].clone())
    }

    fn tail_bound(&self, after: u32) -> Result<Dyadic, GrowthError> {
        if after >= self.anchor {
            return Ok(self.analytic_tail(after));
        }
        let from = (after + 1).max(self.n0);
        Ok(&partial_sum(self, from, self.anchor)? + &self.analytic_tail(self.anchor))
    }

    fn checked_through(&self) -> u32 {
        self.anchor
    }

    fn describe(&self) -> String {
        format!(
            "corollary eps = {}, c = 2^-{}, n0 = {}",
            self.epsilon, self.scale_log2, self.n0
        )
    }
}

/// Build the corollary growth family for `ε > 0`, starting no earlier than `n_min`.
///
/// Tries `c = 1, 1/2, 1/4, …`; for each, the start index is the last `n ≥ 3`
/// where the formula is below 2 (so `f_{n0} = 1` is natural), raised to
/// `n_min`. The first `c` whose certified series bound is `≤ 1/4` wins.
pub fn corollary_family(epsilon: f64, n_min: u32) -> Result<CorollaryFamily, GrowthError> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(GrowthError::Infeasible(format!(
            "epsilon must be a positive finite number, got {epsilon}"
        )));
    }
    if n_min < 3 {
        return Err(GrowthError::Infeasible(format!(
            "n_min = {n_min}: Σ_{{n≥n0}} 2^-n ≤ 1/4 already needs n0 ≥ 3"
        )));
    }
    const MAX_SCALE_LOG2: u32 = 60;
    const ANCHOR_SEARCH: u32 = 100_000;
    let quarter = Dyadic::pow2_neg(2);
    for scale_log2 in 0..=MAX_SCALE_LOG2 {
        let two = BigUint::from(2u32);
        let mut n_cross = 3;
        let mut n = 3;
        while n < ANCHOR_SEARCH {
            let below_two = CorollaryFamily::raw(epsilon, scale_log2, n) < two;
            if below_two {
                n_cross = n;
            } else if CorollaryFamily::formula_increasing_from(epsilon, n) {
                break;
            }
            n += 1;
        }
        if n >= ANCHOR_SEARCH {
            continue;
        }
        let n0 = n_min.max(n_cross);
        let mut family = CorollaryFamily::with_params(epsilon, scale_log2, n0);
        let anchor = (n0..n0 + ANCHOR_SEARCH).find(|&m| {
            CorollaryFamily::formula_increasing_from(epsilon, m)
                && family.value(m).unwrap() <= CorollaryFamily::raw(epsilon, scale_log2, m)
        });
        let Some(anchor) = anchor else { continue };
        family.anchor = anchor;
        let certificate = family.tail_certificate()?;
        if certificate.total <= quarter {
            return Ok(family);
        }
    }
    Err(GrowthError::Infeasible(format!(
        "no scaling constant down to 2^-{MAX_SCALE_LOG2} certifies Σ f_n/2^n ≤ 1/4 \
         for epsilon = {epsilon}, n_min = {n_min}"
    )))
}

/// A sequence extended below its original start by `f_n = ⌈f_{n0} / 2^{n0-n}⌉`.
#[derive(Debug)]
pub struct NormalizedSequence {
    n0: u32,
    original_n0: u32,
    prefix: Vec<BigUint>,
    inner: SharedSequence,
}

impl NormalizedSequence {
    pub fn original_n0(&self) -> u32 {
        self.original_n0
    }
}

impl GrowthSequence for NormalizedSequence {
    fn n0(&self) -> u32 {
        self.n0
    }

    fn value(&self, n: u32) -> Result<BigUint, GrowthError> {
        if n < self.n0 {
            return Err(GrowthError::BelowStart { n, n0: self.n0 });
        }
        if n < self.original_n0 {
            return Ok(self.prefix[(n - self.n0) as usize].clone());
        }
        self.inner.value(n)
    }

    fn tail_bound(&self, after: u32) -> Result<Dyadic, GrowthError> {
        let after = after.max(self.n0 - 1);
        if after + 1 >= self.original_n0 {
            return self.inner.tail_bound(after);
        }
        let head = partial_sum(self, after + 1, self.original_n0 - 1)?;
        Ok(&head + &self.inner.tail_bound(self.original_n0 - 1)?)
    }

    fn checked_through(&self) -> u32 {
        self.inner.checked_through()
    }

    fn available_through(&self) -> Option<u32> {
        self.inner.available_through()
    }

    fn describe(&self) -> String {
        format!(
            "{} extended down to n0 = {}",
            self.inner.describe(),
            self.n0
        )
    }
}

/// Re-base a sequence with `1 < f_{n0} < 2^{n0}/(8 n0)` onto `n0' = max{n : f_n = 1}`.
///
/// Requires the certified series bound to be at most
/// `1/4 - 2 n0 f_{n0} / 2^{n0}`. A sequence that already starts at 1 is
/// returned unchanged.
pub fn normalize_remark(seq: SharedSequence) -> Result<SharedSequence, GrowthError> {
    let n0 = seq.n0();
    let f0 = seq.value(n0)?;
    if f0.is_one() {
        return Ok(seq);
    }
    if f0.is_zero() {
        return Err(GrowthError::NormalizePrecondition(format!(
            "f_{n0} = 0 is not positive"
        )));
    }
    if (&f0 * (8u64 * n0 as u64)) >= (BigUint::one() << n0) {
        return Err(GrowthError::NormalizePrecondition(format!(
            "f_{n0} = {f0} is not below 2^{n0}/(8·{n0})"
        )));
    }
    let allowance = Dyadic::pow2_neg(2)
        .checked_sub(&Dyadic::new(&f0 * (2u64 * n0 as u64), n0))
        .map_err(|_| {
            GrowthError::NormalizePrecondition(format!(
                "1/4 - 2·{n0}·f_{n0}/2^{n0} is negative"
            ))
        })?;
    let certificate = seq.tail_certificate()?;
    if certificate.total > allowance {
        return Err(GrowthError::NormalizePrecondition(format!(
            "certified sum {} exceeds 1/4 - 2·n0·f_n0/2^n0 = {}",
            certificate.total, allowance
        )));
    }
    let mut below = Vec::new();
    for t in 1..n0 {
        let v = (&f0 + (BigUint::one() << t) - 1u32) >> t;
        let done = v.is_one();
        below.push(v);
        if done {
            break;
        }
    }
    if !below.last().is_some_and(|v| v.is_one()) {
        return Err(GrowthError::NormalizePrecondition(
            "downward extension never reaches 1".into(),
        ));
    }
    below.reverse();
    Ok(Arc::new(NormalizedSequence {
        n0: n0 - below.len() as u32,
        original_n0: n0,
        prefix: below,
        inner: seq,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    StartNotOne { n: u32, value: String },
    NonPositive { n: u32 },
    /// `f_{n+1} < f_n`
    Decreasing { n: u32 },
    /// `f_{n+1} > 2 f_n`
    MoreThanDoubled { n: u32 },
    SumExceedsQuarter { certified: Dyadic },
    Provider { message: String },
}

impl Violation {
    pub fn index(&self) -> Option<u32> {
        match self {
            Violation::StartNotOne { n, .. }
            | Violation::NonPositive { n }
            | Violation::Decreasing { n }
            | Violation::MoreThanDoubled { n } => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::StartNotOne { n, value } => write!(f, "n={n}: f_{n} = {value}, expected 1"),
            Violation::NonPositive { n } => write!(f, "n={n}: f_{n} is not positive"),
            Violation::Decreasing { n } => write!(f, "n={n}: f_{} < f_{n}", n + 1),
            Violation::MoreThanDoubled { n } => write!(f, "n={n}: f_{} > 2·f_{n}", n + 1),
            Violation::SumExceedsQuarter { certified } => {
                write!(f, "certified Σ f_n/2^n = {certified} exceeds 1/4")
            }
            Violation::Provider { message } => write!(f, "{message}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n0: u32,
    pub checked_through: u32,
    pub partial_sum: Dyadic,
    pub tail_bound: Option<Dyadic>,
    pub certified_total: Option<Dyadic>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the hypotheses on `n0 ≤ n ≤ horizon`: `f_{n0} = 1`, positivity,
/// `f_n ≤ f_{n+1} ≤ 2 f_n`, and partial sum plus tail bound `≤ 1/4`.
pub fn validate<S: GrowthSequence + ?Sized>(seq: &S, horizon: u32) -> ValidationReport {
    let n0 = seq.n0();
    let through = seq
        .available_through()
        .map_or(horizon, |last| horizon.min(last))
        .max(n0);
    let mut violations = Vec::new();
    let mut partial = Dyadic::new(BigUint::zero(), through);
    let mut prev: Option<BigUint> = None;
    for n in n0..=through {
        let f = match seq.value(n) {
            Ok(f) => f,
            Err(e) => {
                violations.push(Violation::Provider {
                    message: e.to_string(),
                });
                break;
            }
        };
        if n == n0 && !f.is_one() {
            violations.push(Violation::StartNotOne {
                n,
                value: f.to_string(),
            });
        }
        if f.is_zero() {
            violations.push(Violation::NonPositive { n });
        }
        if let Some(p) = &prev {
            if f < *p {
                violations.push(Violation::Decreasing { n: n - 1 });
            }
            if f > p * 2u32 {
                violations.push(Violation::MoreThanDoubled { n: n - 1 });
            }
        }
        partial += &Dyadic::new(f.clone(), n);
        prev = Some(f);
    }
    let (tail_bound, certified_total) = match seq.tail_bound(through) {
        Ok(t) => {
            let total = &partial + &t;
            if total > Dyadic::pow2_neg(2) {
                violations.push(Violation::SumExceedsQuarter {
                    certified: total.clone(),
                });
            }
            (Some(t), Some(total))
        }
        Err(e) => {
            violations.push(Violation::Provider {
                message: e.to_string(),
            });
            (None, None)
        }
    };
    ValidationReport {
        n0,
        checked_through: through,
        partial_sum: partial,
        tail_bound,
        certified_total,
        violations,
    }
}

/// Resource limits for plan construction.
#[derive(Debug, Clone, Copy)]
pub struct PlanOptions {
    /// Hard ceiling on any `ℓ_k`.
    pub max_level: u32,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { max_level: 1 << 20 }
    }
}

/// Tables `ℓ_k`, `a_k`, `s_k` for `k0 ≤ k ≤ k_max`, plus the `f_n` values the
/// tables were derived from (when built from a sequence).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionPlan {
    k0: u32,
    levels: Vec<u32>,
    block_sizes: Vec<u32>,
    kraft: Vec<Dyadic>,
    growth: Option<Vec<BigUint>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanRow {
    pub k: u32,
    pub ell: u32,
    pub a: u32,
    pub s: Dyadic,
}

impl ConstructionPlan {
    /// Unchecked constructor; `s_k` is recomputed from `block_sizes`.
    pub fn from_raw_parts(
        k0: u32,
        levels: Vec<u32>,
        block_sizes: Vec<u32>,
        growth: Option<Vec<BigUint>>,
    ) -> Self {
        assert_eq!(levels.len(), block_sizes.len());
        assert!(!levels.is_empty(), "a plan covers at least k0");
        let mut plan = ConstructionPlan {
            k0,
            levels,
            block_sizes,
            kraft: Vec::new(),
            growth,
        };
        plan.recompute_kraft();
        plan
    }

    /// Plan with the given `a_k` (from `k0` upward) and `ℓ_k = k + a_k`.
    pub fn from_block_sizes(k0: u32, block_sizes: &[u32]) -> Result<Self, PlanError> {
        if block_sizes.is_empty() {
            return Err(PlanError::Invariant("no block sizes given".into()));
        }
        let levels = block_sizes
            .iter()
            .enumerate()
            .map(|(j, a)| k0 + j as u32 + a)
            .collect();
        let plan = Self::from_raw_parts(k0, levels, block_sizes.to_vec(), None);
        plan.check_invariants()?;
        Ok(plan)
    }

    fn recompute_kraft(&mut self) {
        let mut s = Dyadic::zero();
        self.kraft = self
            .block_sizes
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                let k = self.k0 + j as u32;
                s = s.widened(k.max(s.exponent()));
                s += &Dyadic::new(BigUint::from(a), k);
                s.clone()
            })
            .collect();
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    pub fn n0(&self) -> u32 {
        self.k0 + 1
    }

    pub fn k_max(&self) -> u32 {
        self.k0 + self.levels.len() as u32 - 1
    }

    fn slot(&self, k: u32) -> usize {
        assert!(
            k >= self.k0 && k <= self.k_max(),
            "k = {k} outside planned range {}..={}",
            self.k0,
            self.k_max()
        );
        (k - self.k0) as usize
    }

    /// `ℓ_k`. Panics outside `k0..=k_max`.
    pub fn ell(&self, k: u32) -> u32 {
        self.levels[self.slot(k)]
    }

    /// `ℓ_{k-1}`, with the convention `ℓ_{k0-1} = k0`.
    pub fn ell_before(&self, k: u32) -> u32 {
        if k == self.k0 {
            self.k0
        } else {
            self.ell(k - 1)
        }
    }

    /// `a_k`. Panics outside `k0..=k_max`.
    pub fn block_size(&self, k: u32) -> u32 {
        self.block_sizes[self.slot(k)]
    }

    /// `s_k = Σ_{j=k0}^{k} a_j / 2^j`.
    pub fn kraft_through(&self, k: u32) -> &Dyadic {
        &self.kraft[self.slot(k)]
    }

    /// `s_{k-1}`, zero for `k = k0`.
    pub fn kraft_before(&self, k: u32) -> Dyadic {
        if k == self.k0 {
            Dyadic::zero()
        } else {
            self.kraft_through(k - 1).clone()
        }
    }

    pub fn total_kraft(&self) -> &Dyadic {
        self.kraft.last().unwrap()
    }

    /// Largest level reached, `ℓ_{k_max}`.
    pub fn max_level(&self) -> u32 {
        *self.levels.last().unwrap()
    }

    /// Whether every block that can meet `2^[n]` is planned.
    pub fn covers_level(&self, n: u32) -> bool {
        self.max_level() >= n
    }

    /// The `k` with `ℓ_{k-1} < n ≤ ℓ_k`.
    pub fn block_for_level(&self, n: u32) -> Option<u32> {
        (self.k0..=self.k_max()).find(|&k| self.ell_before(k) < n && n <= self.ell(k))
    }

    /// All block indices in lexicographic `(k, i)` order.
    pub fn blocks(&self) -> impl Iterator<Item = BlockIndex> + '_ {
        (self.k0..=self.k_max())
            .flat_map(move |k| (1..=self.block_size(k)).map(move |i| BlockIndex { k, i }))
    }

    pub fn growth_values(&self) -> Option<&[BigUint]> {
        self.growth.as_deref()
    }

    /// `f_n` as recorded at build time.
    pub fn growth_value(&self, n: u32) -> Option<&BigUint> {
        let g = self.growth.as_ref()?;
        n.checked_sub(self.n0()).and_then(|j| g.get(j as usize))
    }

    pub fn rows(&self) -> Vec<PlanRow> {
        (self.k0..=self.k_max())
            .map(|k| PlanRow {
                k,
                ell: self.ell(k),
                a: self.block_size(k),
                s: self.kraft_through(k).reduced(),
            })
            .collect()
    }

    /// Copy with `a_k` replaced; `ℓ_k` is left alone.
    pub fn with_block_size(&self, k: u32, a: u32) -> Self {
        let mut p = self.clone();
        let j = p.slot(k);
        p.block_sizes[j] = a;
        p.recompute_kraft();
        p
    }

    /// Copy with `ℓ_k` replaced; `a_k` is left alone.
    pub fn with_level(&self, k: u32, ell: u32) -> Self {
        let mut p = self.clone();
        let j = p.slot(k);
        p.levels[j] = ell;
        p
    }

    /// Structural invariants: `a_k = ℓ_k - k ≥ 1`, `ℓ` strictly increasing, `s ≤ 1`.
    pub fn check_invariants(&self) -> Result<(), PlanError> {
        for k in self.k0..=self.k_max() {
            let (ell, a) = (self.ell(k), self.block_size(k));
            if ell < k + 1 {
                return Err(PlanError::Invariant(format!("l_{k} = {ell} < k + 1")));
            }
            if a != ell - k {
                return Err(PlanError::Invariant(format!(
                    "a_{k} = {a} but l_{k} - {k} = {}",
                    ell - k
                )));
            }
            if k > self.k0 && ell <= self.ell(k - 1) {
                return Err(PlanError::Invariant(format!(
                    "l_{k} = {ell} does not exceed l_{} = {}",
                    k - 1,
                    self.ell(k - 1)
                )));
            }
        }
        if *self.total_kraft() > Dyadic::one() {
            return Err(PlanError::Invariant(format!(
                "s_{} = {} exceeds 1",
                self.k_max(),
                self.total_kraft()
            )));
        }
        Ok(())
    }
}

/// `f_n · 2^{k+1} ≥ 2^n`, i.e. `f_n/2^n ≥ 2^{-(k+1)}`, in integers.
pub(crate) fn density_at_least(f: &BigUint, n: u32, k: u32) -> bool {
    // f ≥ 2^{n-k-1}  ⟺  bits(f) ≥ n - k  (for f ≥ 1)
    n <= k + 1 || f.bits() >= (n - k) as u64
}

struct PlanBuilder<'a, S: GrowthSequence + ?Sized> {
    seq: &'a S,
    opts: PlanOptions,
    k0: u32,
    levels: Vec<u32>,
    growth: Vec<BigUint>,
}

impl<'a, S: GrowthSequence + ?Sized> PlanBuilder<'a, S> {
    fn new(seq: &'a S, opts: PlanOptions) -> Result<Self, PlanError> {
        let n0 = seq.n0();
        if n0 < 2 {
            return Err(PlanError::StartTooSmall(n0));
        }
        Ok(PlanBuilder {
            seq,
            opts,
            k0: n0 - 1,
            levels: Vec::new(),
            growth: Vec::new(),
        })
    }

    fn f(&mut self, n: u32) -> Result<&BigUint, PlanError> {
        let j = (n - self.seq.n0()) as usize;
        while self.growth.len() <= j {
            let m = self.seq.n0() + self.growth.len() as u32;
            self.growth.push(self.seq.value(m)?);
        }
        Ok(&self.growth[j])
    }

    fn next_k(&self) -> u32 {
        self.k0 + self.levels.len() as u32
    }

    /// Extend by one `k`; `ℓ_k` is the end of the run of `n` with `f_n/2^n ≥ 2^-(k+1)`.
    fn extend(&mut self) -> Result<u32, PlanError> {
        let k = self.next_k();
        let mut n = self.levels.last().copied().unwrap_or(self.seq.n0());
        // a valid sequence has (ℓ_k - k0) 2^-(k+1) ≤ Σ f_n/2^n ≤ 1/4
        let proven = (self.k0 as u64).saturating_add(1u64 << (k - 1).min(62));
        let ceiling = (self.opts.max_level as u64).min(proven);
        loop {
            let next = n + 1;
            if !density_at_least(&self.f(next)?.clone(), next, k) {
                break;
            }
            n = next;
            if n as u64 > ceiling {
                let reason = if ceiling == proven {
                    format!("l_{k} > k0 + 2^(k-1), impossible when the series is at most 1/4")
                } else {
                    format!("hit the level limit {}", self.opts.max_level)
                };
                return Err(PlanError::ScanDiverged {
                    k,
                    reached: n,
                    reason,
                });
            }
        }
        self.levels.push(n);
        Ok(n)
    }

    fn finish(self) -> ConstructionPlan {
        let k0 = self.k0;
        let block_sizes = self
            .levels
            .iter()
            .enumerate()
            .map(|(j, &ell)| ell - (k0 + j as u32))
            .collect();
        ConstructionPlan::from_raw_parts(k0, self.levels, block_sizes, Some(self.growth))
    }
}

/// Plan for `k0 ≤ k ≤ k_max`.
pub fn build_plan<S: GrowthSequence + ?Sized>(
    seq: &S,
    k_max: u32,
    opts: PlanOptions,
) -> Result<ConstructionPlan, PlanError> {
    let mut b = PlanBuilder::new(seq, opts)?;
    if k_max < b.k0 {
        return Err(PlanError::KMaxBelowStart { k_max, k0: b.k0 });
    }
    while b.next_k() <= k_max {
        b.extend()?;
    }
    Ok(b.finish())
}

/// Smallest plan with `ℓ_{k_max} ≥ n_max`, so every level up to `n_max` is covered.
pub fn plan_for_levels<S: GrowthSequence + ?Sized>(
    seq: &S,
    n_max: u32,
    opts: PlanOptions,
) -> Result<ConstructionPlan, PlanError> {
    let mut b = PlanBuilder::new(seq, opts)?;
    while b.extend()? < n_max {}
    Ok(b.finish())
}

/// Named growth families.
#[derive(Debug, Clone)]
pub enum FamilySpec {
    Constant { n0: u32 },
    Corollary { epsilon: f64, n_min: u32 },
    Random { seed: u64 },
    Table(TableSequence),
}

impl FamilySpec {
    pub fn build(&self) -> Result<SharedSequence, GrowthError> {
        Ok(match self {
            FamilySpec::Constant { n0 } => Arc::new(ConstantFamily::new(*n0)),
            FamilySpec::Corollary { epsilon, n_min } => {
                Arc::new(corollary_family(*epsilon, *n_min)?)
            }
            FamilySpec::Random { seed } => Arc::new(random_table(*seed)),
            FamilySpec::Table(t) => Arc::new(t.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n0: u32, values: &[u64], tail: TableTail) -> TableSequence {
        TableSequence::new(n0, values.iter().map(|&v| BigUint::from(v)).collect(), tail).unwrap()
    }

    #[test]
    fn constant_family_from_three_is_valid_with_exact_quarter() {
        let seq = ConstantFamily::new(3);
        let report = validate(&seq, 40);
        assert!(report.is_valid(), "{:?}", report.violations);
        // Σ_{n≥3} 2^-n = 1/4 exactly
        assert_eq!(report.certified_total.unwrap(), Dyadic::pow2_neg(2));
        assert!(!validate(&ConstantFamily::new(2), 10).is_valid());
    }

    #[test]
    fn ratio_and_monotonicity_violations_are_located() {
        let r = validate(&table(5, &[1, 3, 3], TableTail::Constant), 8);
        assert_eq!(r.violations, vec![Violation::MoreThanDoubled { n: 5 }]);
        let r = validate(&table(5, &[1, 2, 1], TableTail::Constant), 8);
        assert_eq!(r.violations, vec![Violation::Decreasing { n: 6 }]);
        let r = validate(&table(5, &[2, 2], TableTail::Constant), 8);
        assert_eq!(r.violations[0].index(), Some(5));
    }

    #[test]
    fn sum_above_quarter_is_reported() {
        // 1/8 + 1/16 + 4/32·2 > 1/4
        let r = validate(&table(3, &[1, 1, 2, 4], TableTail::Constant), 10);
        assert!(matches!(
            r.violations.last(),
            Some(Violation::SumExceedsQuarter { .. })
        ));
    }

    #[test]
    fn constant_family_plan_has_unit_blocks() {
        let seq = ConstantFamily::new(3);
        let plan = build_plan(&seq, 30, PlanOptions::default()).unwrap();
        assert_eq!(plan.k0(), 2);
        for k in 2..=30 {
            // brute-force max over n ≤ 64 of {n : 2^-n ≥ 2^-(k+1)}
            let brute = (3..=64u32)
                .filter(|&n| (1u128 << (k + 1)) >= (1u128 << n.min(127)))
                .max()
                .unwrap();
            assert_eq!(plan.ell(k), brute);
            assert_eq!(plan.block_size(k), 1);
        }
        plan.check_invariants().unwrap();
    }

    #[test]
    fn worked_example_plan_kraft_prefix() {
        let plan = ConstructionPlan::from_block_sizes(2, &[1, 3, 5]).unwrap();
        assert_eq!(plan.kraft_through(4), &Dyadic::new(15u32.into(), 4));
        assert_eq!(plan.ell(3), 6);
        assert_eq!(plan.kraft_before(2), Dyadic::zero());
        assert!(ConstructionPlan::from_block_sizes(1, &[3]).is_err());
    }

    #[test]
    fn plan_rows_obey_maximality_for_random_tables() {
        for seed in 0..30 {
            let seq = random_table(seed);
            assert!(validate(&seq, 120).is_valid(), "seed {seed}");
            let plan = build_plan(&seq, 60, PlanOptions::default()).unwrap();
            plan.check_invariants().unwrap();
            for k in plan.k0()..=plan.k_max() {
                let ell = plan.ell(k);
                let f = |n| seq.value(n).unwrap();
                assert!(density_at_least(&f(ell), ell, k));
                assert!(!density_at_least(&f(ell + 1), ell + 1, k));
                for n in plan.ell_before(k) + 1..=ell {
                    // f_n/2^n < 2^-k on (ℓ_{k-1}, ℓ_k]
                    assert!(f(n) << k < BigUint::one() << n, "seed {seed} k {k} n {n}");
                }
            }
        }
    }

    #[test]
    fn scan_guard_fires_for_non_decaying_provider() {
        // doubling forever: f_n/2^n never decays
        #[derive(Debug)]
        struct Doubling;
        impl GrowthSequence for Doubling {
            fn n0(&self) -> u32 {
                3
            }
            fn value(&self, n: u32) -> Result<BigUint, GrowthError> {
                Ok(BigUint::one() << (n - 3))
            }
            fn tail_bound(&self, _: u32) -> Result<Dyadic, GrowthError> {
                Ok(Dyadic::zero())
            }
            fn checked_through(&self) -> u32 {
                3
            }
            fn describe(&self) -> String {
                "doubling".into()
            }
        }
        let err = build_plan(&Doubling, 6, PlanOptions::default()).unwrap_err();
        assert!(matches!(err, PlanError::ScanDiverged { k: 2, .. }), "{err}");
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let t = TableSequence::parse_csv("n,f_n\n4,1\n5,2\n6,3\n#extend=constant\n").unwrap();
        assert_eq!(t.n0(), 4);
        assert_eq!(t.value(100).unwrap(), BigUint::from(3u32));
        assert_eq!(TableSequence::parse_csv(&t.to_csv()).unwrap(), t);

        let b = TableSequence::parse_csv("n,f_n\n4,1\n5,1\n#tail_bound=1/2^5\n").unwrap();
        assert!(matches!(b.value(6), Err(GrowthError::BeyondTable { .. })));
        assert_eq!(b.tail_bound(5).unwrap(), Dyadic::pow2_neg(5));
        assert!(validate(&b, 50).is_valid());

        for bad in [
            "",
            "x,y\n1,1\n#extend=constant",
            "n,f_n\n3,1\n5,1\n#extend=constant",
            "n,f_n\n3,1\n",
            "n,f_n\n3,1\n#extend=forever",
            "n,f_n\n3,1\n#extend=constant\n4,1",
            "n,f_n\n3,-1\n#extend=constant",
        ] {
            assert!(TableSequence::parse_csv(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn tail_bounds_are_consistent_across_split_points() {
        let t = table(4, &[1, 2, 3, 5, 8, 8], TableTail::Constant);
        let total = t.tail_certificate().unwrap().total;
        for split in 3..15 {
            let head = if split >= 4 {
                partial_sum(&t, 4, split).unwrap()
            } else {
                Dyadic::zero()
            };
            assert_eq!(&head + &t.tail_bound(split).unwrap(), total, "split {split}");
        }
    }

    #[test]
    fn corollary_family_is_valid_and_starts_at_one() {
        let fam = corollary_family(1.0, 4).unwrap();
        assert_eq!(fam.value(fam.n0()).unwrap(), BigUint::one());
        let report = validate(&fam, 200);
        assert!(report.is_valid(), "{:?}", report.violations);
        for eps in [0.25, 0.5, 2.0, 5.0] {
            let fam = corollary_family(eps, 4).unwrap();
            assert!(validate(&fam, 150).is_valid(), "eps {eps}");
        }
        let late = corollary_family(1.0, 60).unwrap();
        assert_eq!(late.n0(), 60);
        assert!(validate(&late, 200).is_valid());
    }

    #[test]
    fn corollary_family_rejects_bad_parameters() {
        assert!(corollary_family(0.0, 4).is_err());
        assert!(corollary_family(-1.0, 4).is_err());
        assert!(corollary_family(f64::NAN, 4).is_err());
        assert!(corollary_family(1.0, 2).is_err());
    }

    #[test]
    fn corollary_values_stay_in_band_of_formula() {
        let fam = corollary_family(1.0, 4).unwrap();
        let c = 2f64.powi(-(fam.scale_log2() as i32));
        for n in 50..=200u32 {
            let f = Dyadic::new(fam.value(n).unwrap(), n).to_f64();
            let x = n as f64;
            let ratio = f * x * x.log2().powi(2);
            assert!(ratio <= c * (1.0 + 1e-9) && ratio >= 0.999 * c, "n {n}: ratio {ratio}, c {c}");
        }
    }

    #[test]
    fn normalize_leaves_unit_start_alone() {
        let seq: SharedSequence = Arc::new(ConstantFamily::new(5));
        let out = normalize_remark(seq).unwrap();
        assert_eq!(out.n0(), 5);
    }

    #[test]
    fn normalize_extends_down_by_ceiling_rule() {
        let seq: SharedSequence = Arc::new(table(10, &[4], TableTail::Constant));
        let out = normalize_remark(seq).unwrap();
        assert_eq!(out.n0(), 8);
        let vals: Vec<u32> = (8..=12)
            .map(|n| out.value(n).unwrap().try_into().unwrap())
            .collect();
        assert_eq!(vals, vec![1, 2, 4, 4, 4]);
        let report = validate(out.as_ref(), 60);
        assert!(report.is_valid(), "{:?}", report.violations);
        // downward part is ratio-monotone
        for n in 8..10 {
            let (a, b) = (out.value(n).unwrap(), out.value(n + 1).unwrap());
            assert!(a <= b && b <= &a * 2u32);
        }
    }

    #[test]
    fn normalize_rejects_failed_preconditions() {
        // f_{n0} too large relative to 2^{n0}/(8 n0)
        let seq: SharedSequence = Arc::new(table(10, &[13], TableTail::Constant));
        assert!(matches!(
            normalize_remark(seq),
            Err(GrowthError::NormalizePrecondition(_))
        ));
        // sum too large for the reduced allowance
        let seq: SharedSequence = Arc::new(table(10, &[12], TableTail::Constant));
        assert!(normalize_remark(seq).is_err());
    }
}
