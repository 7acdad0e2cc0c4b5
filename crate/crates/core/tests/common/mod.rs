#![allow(dead_code)]

use std::sync::Arc;

use antichain_core::growth::{corollary_family, random_table, ConstantFamily};
use antichain_core::{plan_for_levels, ConstructionPlan, PlanOptions, SharedSequence};

pub struct Family {
    pub name: String,
    pub seq: SharedSequence,
}

impl Family {
    pub fn plan_to(&self, n_max: u32) -> ConstructionPlan {
        plan_for_levels(self.seq.as_ref(), n_max, PlanOptions::default())
            .unwrap_or_else(|e| panic!("{}: {e}", self.name))
    }
}

pub fn constant() -> Family {
    Family {
        name: "constant n0=3".into(),
        seq: Arc::new(ConstantFamily::new(3)),
    }
}

pub fn corollary() -> Family {
    Family {
        name: "corollary eps=1".into(),
        seq: Arc::new(corollary_family(1.0, 4).expect("eps = 1 is admissible")),
    }
}

pub fn random(seed: u64) -> Family {
    Family {
        name: format!("random seed={seed}"),
        seq: Arc::new(random_table(seed)),
    }
}

/// Constant, corollary, and 20 seeded random tables.
pub fn all() -> Vec<Family> {
    let mut v = vec![constant(), corollary()];
    v.extend((0..20).map(random));
    v
}
