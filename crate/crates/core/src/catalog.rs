//! The standard example rules and the axioms each is known to satisfy or
//! violate.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::amount::Ratio;
use crate::axioms::Axiom;
use crate::rules::{AllocationRule, ScalingFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub rule: AllocationRule,
    /// `(axiom, holds)` pairs.
    pub claims: Vec<(Axiom, bool)>,
}

impl CatalogEntry {
    pub fn claim(&self, axiom: Axiom) -> Option<bool> {
        self.claims
            .iter()
            .find(|(a, _)| *a == axiom)
            .map(|&(_, v)| v)
    }
}

/// Step used for the catalog's step-shaped scaling function: one half below
/// a total of 4, one from there on.
pub fn catalog_step() -> ScalingFunction {
    ScalingFunction::step(4, Ratio::new(1, 2), Ratio::from_integer(1)).expect("valid step")
}

pub fn catalog() -> Vec<CatalogEntry> {
    use Axiom::*;
    let half = ScalingFunction::constant(Ratio::new(1, 2)).expect("valid constant");
    vec![
        CatalogEntry {
            name: "proportional".into(),
            rule: AllocationRule::proportional(),
            claims: vec![(A1, true), (A2a, true), (A3, true), (A4a, true)],
        },
        CatalogEntry {
            name: "allzero".into(),
            rule: AllocationRule::all_zero(),
            claims: vec![
                (A1, true),
                (A2a, false),
                (A2b, true),
                (A3, true),
                (A4a, true),
            ],
        },
        CatalogEntry {
            name: "genprop:const:1/2".into(),
            rule: AllocationRule::generalized(half),
            claims: vec![(A1, true), (A2b, true), (A3, true), (A4a, true)],
        },
        CatalogEntry {
            name: "genprop:step:4:1/2:1".into(),
            rule: AllocationRule::generalized(catalog_step()),
            claims: vec![(A1, true), (A2b, true), (A3, true), (A4a, true)],
        },
        CatalogEntry {
            name: "squares".into(),
            rule: AllocationRule::squares(),
            claims: vec![(A1, true), (A2a, true), (A3, true), (A4c, false)],
        },
        CatalogEntry {
            name: "sqrts".into(),
            rule: AllocationRule::square_roots(),
            claims: vec![(A1, true), (A2a, true), (A3, false), (A4a, true)],
        },
        CatalogEntry {
            name: "halfthreshold".into(),
            rule: AllocationRule::half_threshold(),
            claims: vec![
                (A1, true),
                (A2b, true),
                (A3, true),
                (A4b, false),
                (A4c, true),
            ],
        },
    ]
}
