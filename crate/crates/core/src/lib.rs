//! Block-reward allocation rules for proof-of-work protocols, an exhaustive
//! checker for their incentive axioms on bounded universes, a brute-force
//! search over rule tables, and a simulator for a partial-solution protocol
//! that estimates hash rates.
//!
//! The crate is `no_std` with `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod amount;
pub mod axioms;
pub mod catalog;
pub mod config;
pub mod deviation;
pub mod error;
mod grammar;
pub mod matrix;
pub mod partitions;
pub mod rules;
pub mod search;
pub mod sim;
pub mod universe;
pub mod utility;

pub use amount::{Amount, Ratio};
pub use axioms::{check, Axiom, AxiomVerdict, CheckOptions, Outcome, Witness};
pub use catalog::{catalog, CatalogEntry};
pub use config::{Allocation, Configuration};
pub use deviation::{CoalitionMerge, SharingFamily, SharingScheme, SybilSplit};
pub use error::{AxiomError, RuleError, SearchError, SimError, UtilityError};
pub use rules::{AllocationRule, Rule, RuleKind, ScalingFunction, Semantics, TableRule};
pub use universe::Universe;
pub use utility::{Shape, UtilityFunction};
