//! Browser bindings: plan tables, level-count curves, and small enumerations
//! with their antichain certificate. Every entry point returns a JSON string.

use antichain_core::antichain::{count_exact, decode, enumerate_up_to, level_lower_bound};
use antichain_core::bitstring::BitString;
use antichain_core::growth::{plan_for_levels, validate, FamilySpec, PlanOptions, SharedSequence};
use antichain_core::verify::{check_antichain, check_claim1};
use antichain_core::{ConstructionPlan, Dyadic};
use num_bigint::BigUint;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_LEVEL: u32 = 1000;
const MAX_LISTED: usize = 5000;

fn family(name: &str, param: f64) -> Result<SharedSequence, String> {
    let spec = match name {
        "constant" => FamilySpec::Constant {
            n0: if param >= 2.0 { param as u32 } else { 3 },
        },
        "corollary" => FamilySpec::Corollary {
            epsilon: param,
            n_min: 4,
        },
        "random" => FamilySpec::Random { seed: param as u64 },
        other => return Err(format!("unknown family `{other}`")),
    };
    let seq = spec.build().map_err(|e| e.to_string())?;
    let report = validate(seq.as_ref(), 256);
    if let Some(v) = report.violations.first() {
        return Err(format!("invalid sequence: {v}"));
    }
    Ok(seq)
}

fn planned(name: &str, param: f64, n_max: u32) -> Result<(SharedSequence, ConstructionPlan), String> {
    if n_max > MAX_LEVEL {
        return Err(format!("n is limited to {MAX_LEVEL} in the demo"));
    }
    let seq = family(name, param)?;
    if n_max < seq.n0() {
        return Err(format!("n must be at least n0 = {}", seq.n0()));
    }
    let plan = plan_for_levels(seq.as_ref(), n_max, PlanOptions::default()).map_err(|e| e.to_string())?;
    Ok((seq, plan))
}

/// `log2(x / 2^n)` for plotting; `None` for zero.
fn log2_density(x: &BigUint, n: u32) -> Option<f64> {
    let d = Dyadic::new(x.clone(), n).to_f64();
    (d > 0.0).then(|| d.log2())
}

pub fn plan_report_json(name: &str, param: f64, n_max: u32) -> Result<String, String> {
    let (seq, plan) = planned(name, param, n_max)?;
    let cert = check_claim1(&plan);
    Ok(json!({
        "family": seq.describe(),
        "rows": plan.rows(),
        "certificate": cert,
    })
    .to_string())
}

pub fn level_counts_json(name: &str, param: f64, n_max: u32) -> Result<String, String> {
    let (seq, plan) = planned(name, param, n_max)?;
    let mut rows = Vec::new();
    for n in seq.n0()..=n_max {
        let count = count_exact(&plan, n).map_err(|e| e.to_string())?;
        let f_n = seq.value(n).map_err(|e| e.to_string())?;
        let bound = level_lower_bound(&plan, n).expect("plan covers n");
        rows.push(json!({
            "n": n,
            "count": count.to_string(),
            "log2_count_density": log2_density(&count, n),
            "log2_f_density": log2_density(&f_n, n),
            "log2_bound_density": log2_density(&bound, n),
        }));
    }
    Ok(Value::Array(rows).to_string())
}

pub fn enumerate_json(name: &str, param: f64, n_max: u32) -> Result<String, String> {
    let (_, plan) = planned(name, param, n_max)?;
    let total = count_exact(&plan, n_max).map_err(|e| e.to_string())?;
    if total > BigUint::from(MAX_LISTED) {
        return Err(format!("{total} sets; the demo lists at most {MAX_LISTED}"));
    }
    let elements: Vec<_> = enumerate_up_to(&plan, n_max).map_err(|e| e.to_string())?.collect();
    let bits: Vec<BitString> = elements.iter().map(|e| e.bits.clone()).collect();
    let cert = check_antichain(&bits);
    let listed: Vec<Value> = elements
        .iter()
        .map(|e| json!({"k": e.block.k, "i": e.block.i, "set": e.bits.positions().collect::<Vec<_>>()}))
        .collect();
    Ok(json!({"elements": listed, "certificate": cert}).to_string())
}

pub fn decode_json(name: &str, param: f64, set: &str) -> Result<String, String> {
    let mut items = Vec::new();
    for tok in set.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let p: usize = tok.parse().map_err(|_| format!("bad element `{tok}`"))?;
        if p == 0 || items.last().is_some_and(|&q| q >= p) {
            return Err("give strictly increasing positive integers".into());
        }
        items.push(p);
    }
    let top = items.last().copied().unwrap_or(0) as u32;
    let seq = family(name, param)?;
    let (_, plan) = planned(name, param, top.max(seq.n0()))?;
    let bits = BitString::from_positions(top as usize, items);
    Ok(match decode(&plan, &bits) {
        Some(b) => json!({"member": true, "k": b.k, "i": b.i}),
        None => json!({"member": false}),
    }
    .to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Plan table `k, ℓ_k, a_k, s_k` with the Kraft-sum certificate.
#[wasm_bindgen]
pub fn plan_report(family: &str, param: f64, n_max: u32) -> Result<String, JsValue> {
    to_js(plan_report_json(family, param, n_max))
}

/// Per-level exact counts with `log2` densities for plotting.
#[wasm_bindgen]
pub fn level_counts(family: &str, param: f64, n_max: u32) -> Result<String, JsValue> {
    to_js(level_counts_json(family, param, n_max))
}

/// All members inside `{1..n_max}` and the pairwise antichain check.
#[wasm_bindgen]
pub fn enumerate(family: &str, param: f64, n_max: u32) -> Result<String, JsValue> {
    to_js(enumerate_json(family, param, n_max))
}

#[wasm_bindgen]
pub fn decode_set(family: &str, param: f64, set: &str) -> Result<String, JsValue> {
    to_js(decode_json(family, param, set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_report_for_constant_family() {
        let v: Value = serde_json::from_str(&plan_report_json("constant", 3.0, 6).unwrap()).unwrap();
        assert_eq!(v["rows"][0]["ell"], 3);
        assert_eq!(v["certificate"]["verdict"], "pass");
    }

    #[test]
    fn level_counts_are_exact_strings() {
        let v: Value = serde_json::from_str(&level_counts_json("constant", 3.0, 8).unwrap()).unwrap();
        let counts: Vec<&str> = v.as_array().unwrap().iter().map(|r| r["count"].as_str().unwrap()).collect();
        assert_eq!(counts, ["1", "2", "3", "4", "5", "6"]);
        let v: Value = serde_json::from_str(&level_counts_json("corollary", 1.0, 200).unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 193);
    }

    #[test]
    fn enumeration_and_decoding() {
        let v: Value = serde_json::from_str(&enumerate_json("constant", 3.0, 5).unwrap()).unwrap();
        assert_eq!(v["elements"][1]["set"], json!([1, 3, 4]));
        assert_eq!(v["certificate"]["verdict"], "pass");
        assert!(enumerate_json("corollary", 1.0, 40).is_err());
        let d: Value = serde_json::from_str(&decode_json("constant", 3.0, "1 3 4").unwrap()).unwrap();
        assert_eq!(d, json!({"member": true, "k": 3, "i": 1}));
        assert!(decode_json("constant", 3.0, "4 1").is_err());
        assert!(plan_report_json("nope", 0.0, 10).is_err());
    }
}
