//! Rule-by-axiom verdict tables cross-checked against known claims.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::axioms::{check, Axiom, AxiomVerdict, CheckOptions, Checker};
use crate::catalog::CatalogEntry;
use crate::error::AxiomError;
use crate::universe::Universe;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub rule: String,
    pub axiom: Axiom,
    pub claimed: bool,
    pub observed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub rule: String,
    pub verdicts: Vec<AxiomVerdict>,
    pub discrepancies: Vec<Discrepancy>,
}

impl MatrixRow {
    pub fn verdict(&self, axiom: Axiom) -> Option<&AxiomVerdict> {
        self.verdicts.iter().find(|v| v.axiom == axiom)
    }

    pub fn passed(&self, axiom: Axiom) -> Option<bool> {
        self.verdict(axiom).map(AxiomVerdict::passed)
    }

    /// Fail(A4c) implies Fail(A4b) implies Fail(A4a).
    pub fn grade_order_holds(&self) -> bool {
        let fails = |a| self.passed(a) == Some(false);
        (!fails(Axiom::A4c) || fails(Axiom::A4b)) && (!fails(Axiom::A4b) || fails(Axiom::A4a))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomMatrix {
    pub universe: Universe,
    pub rows: Vec<MatrixRow>,
}

impl AxiomMatrix {
    pub fn discrepancies(&self) -> impl Iterator<Item = &Discrepancy> {
        self.rows.iter().flat_map(|r| r.discrepancies.iter())
    }

    pub fn matches_claims(&self) -> bool {
        self.discrepancies().next().is_none()
    }

    pub fn grade_order_holds(&self) -> bool {
        self.rows.iter().all(MatrixRow::grade_order_holds)
    }
}

/// All seven axioms for one rule.
pub fn matrix_row(
    entry: &CatalogEntry,
    universe: &Universe,
    opts: &CheckOptions,
) -> Result<MatrixRow, AxiomError> {
    matrix_row_with(entry, universe, opts, &check)
}

pub fn matrix_row_with(
    entry: &CatalogEntry,
    universe: &Universe,
    opts: &CheckOptions,
    checker: Checker<'_>,
) -> Result<MatrixRow, AxiomError> {
    let verdicts = Axiom::ALL
        .iter()
        .map(|&a| checker(&entry.rule, universe, a, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MatrixRow::from_verdicts(entry, verdicts))
}

impl MatrixRow {
    /// Compares verdicts with the entry's claims.
    pub fn from_verdicts(entry: &CatalogEntry, verdicts: Vec<AxiomVerdict>) -> Self {
        let discrepancies = verdicts
            .iter()
            .filter_map(|v| {
                let claimed = entry.claim(v.axiom)?;
                (claimed != v.passed()).then(|| Discrepancy {
                    rule: entry.name.clone(),
                    axiom: v.axiom,
                    claimed,
                    observed: v.passed(),
                })
            })
            .collect();
        MatrixRow {
            rule: entry.name.clone(),
            verdicts,
            discrepancies,
        }
    }
}

pub fn axiom_matrix(
    entries: &[CatalogEntry],
    universe: &Universe,
    opts: &CheckOptions,
) -> Result<AxiomMatrix, AxiomError> {
    Ok(AxiomMatrix {
        universe: *universe,
        rows: entries
            .iter()
            .map(|e| matrix_row(e, universe, opts))
            .collect::<Result<_, _>>()?,
    })
}
