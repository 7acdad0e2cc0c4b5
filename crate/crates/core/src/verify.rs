//! Exact certificates for the antichain property, Sperner's bound, the series
//! `Σ |F ∩ 2^[n]| / 2^n ≤ 2`, and the two counting claims behind the
//! construction.
//!
//! Every value recorded in a certificate is an integer or an exact dyadic
//! rational printed as `m/2^e`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::antichain::{count_by_blocks, count_exact, enumerate_with_codewords, LevelCounts};
use crate::binomial::central_binomial;
use crate::bitstring::BitString;
use crate::dyadic::Dyadic;
use crate::growth::{density_at_least, ConstructionPlan, GrowthSequence};
use crate::prefixcode::{
    check_codeword_values, check_prefix_free, check_reverse_lex, codewords_iter, BlockIndex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Antichain,
    Sperner,
    KraftSeries,
    Claim1,
    Claim3,
    PrefixFree,
    ReverseLex,
    CodewordValues,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("plain enum");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Not run, e.g. the family was too large to enumerate under the cap.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CheckKind,
    pub scope: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    pub values: BTreeMap<String, String>,
}

impl Certificate {
    fn new(kind: CheckKind, scope: impl Into<String>) -> Self {
        Certificate {
            kind,
            scope: scope.into(),
            verdict: Verdict::Pass,
            witness: None,
            values: BTreeMap::new(),
        }
    }

    fn value(mut self, key: &str, v: impl ToString) -> Self {
        self.values.insert(key.to_string(), v.to_string());
        self
    }

    fn failed(mut self, witness: Value) -> Self {
        self.verdict = Verdict::Fail;
        self.witness = Some(witness);
        self
    }

    fn skipped(mut self, reason: &str) -> Self {
        self.verdict = Verdict::Skipped;
        self.values.insert("reason".into(), reason.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed_check(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        write!(f, "{verdict} {} [{}]", self.kind, self.scope)?;
        for (k, v) in &self.values {
            write!(f, " {k}={v}")?;
        }
        if let Some(w) = &self.witness {
            write!(f, " witness={w}")?;
        }
        Ok(())
    }
}

fn set_json(s: &BitString) -> Value {
    json!(s.positions().collect::<Vec<_>>())
}

/// All distinct pairs; fails on the first `(A, B)` with `A ⊆ B`, scanning `B`
/// in input order and `A` over the earlier elements. Repeated sets count as a
/// violation.
pub fn check_antichain(elements: &[BitString]) -> Certificate {
    let cert = Certificate::new(CheckKind::Antichain, format!("{} sets", elements.len()))
        .value("elements", elements.len());
    let sizes: Vec<usize> = elements.iter().map(BitString::count_ones).collect();
    for (j, b) in elements.iter().enumerate() {
        for (i, a) in elements[..j].iter().enumerate() {
            let (sub, sup) = match sizes[i].cmp(&sizes[j]) {
                std::cmp::Ordering::Less => (a, b),
                std::cmp::Ordering::Greater => (b, a),
                std::cmp::Ordering::Equal => {
                    if a.same_set(b) {
                        return cert.failed(json!({"subset": set_json(a), "superset": set_json(b), "indices": [i, j]}));
                    }
                    continue;
                }
            };
            if sub.is_subset_of(sup) {
                return cert.failed(
                    json!({"subset": set_json(sub), "superset": set_json(sup), "indices": [i, j]}),
                );
            }
        }
    }
    cert
}

/// `count ≤ C(n, ⌊n/2⌋)`.
pub fn check_sperner(count: &BigUint, n: u32) -> Certificate {
    let bound = central_binomial(n as u64);
    let cert = Certificate::new(CheckKind::Sperner, format!("n={n}"))
        .value("count", count)
        .value("bound", &bound);
    if *count > bound {
        cert.failed(json!({"n": n}))
    } else {
        cert
    }
}

/// Sperner's bound at every level in `counts`.
pub fn check_sperner_levels(counts: &LevelCounts) -> Certificate {
    let scope = scope_of(counts);
    let mut cert = Certificate::new(CheckKind::Sperner, scope).value("levels", counts.iter().count());
    for (n, c) in counts.iter() {
        let level = check_sperner(c, n);
        if level.failed_check() {
            cert.values.extend(level.values);
            return cert.failed(json!({"n": n}));
        }
    }
    cert
}

fn scope_of(counts: &LevelCounts) -> String {
    match counts.last() {
        Some(last) => format!("n={}..={last}", counts.first()),
        None => "empty".into(),
    }
}

/// Exact partial sum `Σ counts[n] / 2^n`, passing iff it is at most 2.
pub fn check_kraft_series(counts: &LevelCounts) -> Certificate {
    let top = counts.last().unwrap_or(0);
    let mut numerator = BigUint::zero();
    for (n, c) in counts.iter() {
        numerator += c << (top - n);
    }
    let sum = Dyadic::new(numerator, top).reduced();
    let cert = Certificate::new(CheckKind::KraftSeries, scope_of(counts)).value("partial_sum", &sum);
    if sum > Dyadic::from_integer(2u32) {
        // locate the first prefix that already exceeds 2
        let mut running = Dyadic::zero();
        let mut at = top;
        for (n, c) in counts.iter() {
            running += &Dyadic::new(c.clone(), n);
            if running > Dyadic::from_integer(2u32) {
                at = n;
                break;
            }
        }
        cert.failed(json!({"n": at}))
    } else {
        cert
    }
}

/// Re-derives `s_K ≤ 1` for the plan together with the finite chain
///
/// `s_K ≤ Σ (ℓ_k - k0)/2^k ≤ 4 Σ (ℓ_k - ℓ_{k-1})/2^{k+1} ≤ 4 Σ_{n ≤ ℓ_K} f_n/2^n`
///
/// and the per-block inequality. Table consistency (`a_k = ℓ_k - k`,
/// increasing levels, `ℓ_k` maximal for the recorded `f_n`) is checked first.
/// The chain steps need the `f_n` snapshot and are skipped without one.
pub fn check_claim1(plan: &ConstructionPlan) -> Certificate {
    let (k0, kmax) = (plan.k0(), plan.k_max());
    let s = plan.total_kraft().reduced();
    let cert = Certificate::new(CheckKind::Claim1, format!("k={k0}..={kmax}")).value("s", &s);

    for k in k0..=kmax {
        let (ell, a) = (plan.ell(k), plan.block_size(k));
        if ell < k + 1 || a != ell - k {
            return cert.failed(json!({"k": k, "ell": ell, "a": a, "reason": "a_k != l_k - k"}));
        }
        if ell <= plan.ell_before(k) {
            return cert.failed(json!({"k": k, "ell": ell, "reason": "levels not increasing"}));
        }
    }
    if s > Dyadic::one() {
        return cert.failed(json!({"k": kmax, "reason": "s exceeds 1"}));
    }
    if plan.growth_values().is_none() {
        return cert.value("growth", "not recorded");
    }

    let f = |n: u32| plan.growth_value(n).cloned();
    let mut block_lhs = Dyadic::zero();
    let mut abel = Dyadic::zero();
    let mut f_partial = Dyadic::zero();
    for k in k0..=kmax {
        let (before, ell) = (plan.ell_before(k), plan.ell(k));
        let (Some(f_top), Some(f_next)) = (f(ell), f(ell + 1)) else {
            return cert.failed(json!({"k": k, "reason": "growth snapshot too short"}));
        };
        if !density_at_least(&f_top, ell, k) || density_at_least(&f_next, ell + 1, k) {
            return cert.failed(json!({"k": k, "ell": ell, "reason": "l_k is not the last level with f_n/2^n >= 2^-(k+1)"}));
        }
        let mut block_f = Dyadic::zero();
        let lo = if k == k0 { plan.n0() } else { before + 1 };
        for n in lo..=ell {
            let fv = f(n).expect("snapshot covers l_k");
            block_f += &Dyadic::new(fv, n);
        }
        let lhs = Dyadic::new(BigUint::from(ell - before), k + 1);
        if lhs > block_f {
            return cert.failed(json!({
                "k": k,
                "reason": "per-block inequality",
                "lhs": lhs.reduced().to_string(),
                "rhs": block_f.reduced().to_string(),
            }));
        }
        block_lhs += &lhs;
        abel += &Dyadic::new(BigUint::from(ell - k0), k);
        f_partial += &block_f;
    }
    let four = BigUint::from(4u32);
    let cert = cert
        .value("sum_l_minus_k0", abel.reduced())
        .value("sum_block_lhs", block_lhs.reduced())
        .value("f_partial_sum", f_partial.reduced());
    let steps = [
        (s <= abel, "s <= sum (l_k - k0)/2^k"),
        (abel <= block_lhs.scaled(&four), "sum (l_k - k0)/2^k <= 4 sum block lhs"),
        (block_lhs <= f_partial, "sum block lhs <= sum f_n/2^n"),
    ];
    match steps.iter().find(|(ok, _)| !ok) {
        Some((_, step)) => cert.failed(json!({"reason": step})),
        None => cert,
    }
}

/// For `n0 ≤ n ≤ n_max`: `count(n) ≥ 2^{n-k} - 1 ≥ f_n` with `n ∈ (ℓ_{k-1}, ℓ_k]`.
/// The count comes from the block recurrence and is cross-checked against the
/// binomial route.
pub fn check_claim3<S: GrowthSequence + ?Sized>(
    plan: &ConstructionPlan,
    seq: &S,
    n_max: u32,
) -> Certificate {
    let n0 = plan.n0();
    let cert = Certificate::new(CheckKind::Claim3, format!("n={n0}..={n_max}"));
    let mut checked = 0u32;
    for n in n0..=n_max {
        let Some(k) = plan.block_for_level(n) else {
            return cert.failed(json!({"n": n, "reason": "level not covered by the plan"}));
        };
        let count = match count_exact(plan, n) {
            Ok(c) => c,
            Err(e) => return cert.failed(json!({"n": n, "reason": e.to_string()})),
        };
        match count_by_blocks(plan, n) {
            Ok(c) if c == count => {}
            Ok(c) => {
                return cert.failed(json!({
                    "n": n, "reason": "recurrence and block sum disagree",
                    "recurrence": count.to_string(), "blocks": c.to_string(),
                }))
            }
            Err(e) => return cert.failed(json!({"n": n, "reason": e.to_string()})),
        }
        let bound = (BigUint::one() << (n - k)) - 1u32;
        let f_n = match plan.growth_value(n).cloned().map(Ok).unwrap_or_else(|| seq.value(n)) {
            Ok(v) => v,
            Err(e) => return cert.failed(json!({"n": n, "reason": e.to_string()})),
        };
        if count < bound || bound < f_n {
            return cert
                .value("count", &count)
                .value("bound", &bound)
                .value("f_n", &f_n)
                .failed(json!({"n": n, "k": k}));
        }
        checked += 1;
    }
    cert.value("levels", checked)
}

/// The three codeword certificates: prefix-free, strictly decreasing, and
/// each word equal to the digits of `1 - s_{k-1} - i/2^k`.
pub fn check_prefix_code(
    plan: &ConstructionPlan,
    entries: &[(BlockIndex, BitString)],
) -> [Certificate; 3] {
    let scope = match (entries.first(), entries.last()) {
        (Some(a), Some(b)) => format!("{}..{}", a.0, b.0),
        _ => "empty".into(),
    };
    let words: Vec<BitString> = entries.iter().map(|e| e.1.clone()).collect();
    let pair = |(a, b): (BitString, BitString)| json!({"first": a.to_string(), "second": b.to_string()});

    let mut prefix_free = Certificate::new(CheckKind::PrefixFree, scope.clone()).value("words", words.len());
    if let Some(w) = check_prefix_free(&words) {
        prefix_free = prefix_free.failed(pair(w));
    }
    let mut reverse_lex = Certificate::new(CheckKind::ReverseLex, scope.clone());
    if let Some(w) = check_reverse_lex(&words) {
        reverse_lex = reverse_lex.failed(pair(w));
    }
    let mut values = Certificate::new(CheckKind::CodewordValues, scope);
    if let Some((idx, word)) = check_codeword_values(plan, entries) {
        values = values.failed(json!({"k": idx.k, "i": idx.i, "word": word.to_string()}));
    }
    [prefix_free, reverse_lex, values]
}

/// Everything `verify` runs for one plan and level range.
#[derive(Debug, Clone, Serialize)]
pub struct Bundle {
    pub certificates: Vec<Certificate>,
}

impl Bundle {
    pub fn all_passed(&self) -> bool {
        self.certificates.iter().all(|c| !c.failed_check())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Certificate> {
        self.certificates.iter().filter(|c| c.failed_check())
    }
}

/// Codewords of every block that can meet `2^[n_max]`, plus the certificate
/// for a nonpositive codeword if one turns up.
pub fn plan_codewords(
    plan: &ConstructionPlan,
    n_max: u32,
) -> (Vec<(BlockIndex, BitString)>, Option<Certificate>) {
    let last_k = (plan.k0()..=plan.k_max())
        .take_while(|&k| plan.ell_before(k) < n_max)
        .last()
        .unwrap_or(plan.k0());
    let mut out = Vec::new();
    for item in codewords_iter(plan, last_k) {
        match item {
            Ok(e) => out.push(e),
            Err(e) => {
                let cert = Certificate::new(CheckKind::CodewordValues, format!("k<={last_k}"))
                    .failed(json!({"reason": e.to_string()}));
                return (out, Some(cert));
            }
        }
    }
    (out, None)
}

/// The plan certificate, the codeword certificates, Sperner, the series bound,
/// the level lower bound and,
/// when `|F ∩ 2^[n_max]| ≤ cap`, the antichain check on the enumerated family.
pub fn run_all<S: GrowthSequence + ?Sized>(
    plan: &ConstructionPlan,
    seq: &S,
    n_max: u32,
    cap: u64,
) -> Bundle {
    let (codewords, error) = plan_codewords(plan, n_max);
    let mut bundle = run_with_codewords(plan, seq, &codewords, n_max, cap);
    bundle.certificates.extend(error);
    bundle
}

/// [`run_all`] with the codeword list supplied by the caller.
pub fn run_with_codewords<S: GrowthSequence + ?Sized>(
    plan: &ConstructionPlan,
    seq: &S,
    codewords: &[(BlockIndex, BitString)],
    n_max: u32,
    cap: u64,
) -> Bundle {
    let mut certificates = vec![check_claim1(plan)];
    certificates.extend(check_prefix_code(plan, codewords));

    let n0 = plan.n0();
    let counts: Result<Vec<BigUint>, _> = (n0..=n_max).map(|n| count_exact(plan, n)).collect();
    let top_count = match counts {
        Ok(counts) => {
            let counts = LevelCounts::new(n0, counts);
            certificates.push(check_sperner_levels(&counts));
            certificates.push(check_kraft_series(&counts));
            counts.get(n_max).cloned()
        }
        Err(e) => {
            let witness = json!({"reason": e.to_string()});
            certificates.push(Certificate::new(CheckKind::Sperner, "counts").failed(witness.clone()));
            certificates.push(Certificate::new(CheckKind::KraftSeries, "counts").failed(witness));
            None
        }
    };
    certificates.push(check_claim3(plan, seq, n_max));

    let antichain_scope = format!("n={n_max}");
    let cert = match top_count {
        Some(c) if c <= BigUint::from(cap) => {
            let elements: Vec<BitString> =
                enumerate_with_codewords(plan, codewords.to_vec(), n_max)
                    .map(|e| e.bits)
                    .collect();
            let mut cert = check_antichain(&elements);
            cert.scope = antichain_scope;
            cert
        }
        Some(c) => Certificate::new(CheckKind::Antichain, antichain_scope)
            .value("count", c)
            .value("cap", cap)
            .skipped("count exceeds the enumeration cap"),
        None => Certificate::new(CheckKind::Antichain, antichain_scope)
            .skipped("level counts unavailable"),
    };
    certificates.push(cert);
    Bundle { certificates }
}
