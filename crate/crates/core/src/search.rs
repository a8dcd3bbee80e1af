//! Brute-force search over symmetric rule tables on a bounded universe, and
//! the risk-sensitive possibility/impossibility checks built on the engine.
//!
//! Tables are filled in layers: configurations with fewer entries above one
//! come first, then smaller totals. Each sybil or collusion constraint is
//! attached to the last configuration it mentions, so it is checked as soon
//! as every value it reads has been fixed.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::amount::Ratio;
use crate::axioms::{
    check, collusion_violation, sybil_violation, Axiom, AxiomVerdict, BudgetMode, CheckOptions,
    Checker, Witness,
};
use crate::config::Configuration;
use crate::deviation::{
    enumerate_merges, enumerate_sybil_splits, CoalitionMerge, SharingFamily, SybilSplit,
};
use crate::error::{AxiomError, SearchError};
use crate::rules::{AllocationRule, Rule, RuleKind, TableRule};
use crate::universe::Universe;
use crate::utility::{Shape, UtilityFunction};

pub const MAX_SEARCH_TOTAL: u64 = 5;
pub const MAX_GRID: u64 = 60;

/// Axioms imposed on candidate tables. Symmetry holds by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomSet {
    pub budget: Budget,
    pub sybil: bool,
    pub collusion: Option<Axiom>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Strong,
    Weak,
}

impl From<Budget> for BudgetMode {
    fn from(b: Budget) -> Self {
        match b {
            Budget::Strong => BudgetMode::Strong,
            Budget::Weak => BudgetMode::Weak,
        }
    }
}

impl AxiomSet {
    /// A1, A2a, A3, A4c.
    pub fn uniqueness() -> Self {
        AxiomSet {
            budget: Budget::Strong,
            sybil: true,
            collusion: Some(Axiom::A4c),
        }
    }

    /// A1, A2b, A3, A4b.
    pub fn generalized_uniqueness() -> Self {
        AxiomSet {
            budget: Budget::Weak,
            sybil: true,
            collusion: Some(Axiom::A4b),
        }
    }

    pub fn without(mut self, axiom: Axiom) -> Self {
        if axiom == Axiom::A3 {
            self.sybil = false;
        }
        if self.collusion == Some(axiom) {
            self.collusion = None;
        }
        self
    }

    pub fn axioms(&self) -> Vec<Axiom> {
        let mut out = vec![Axiom::A1];
        out.push(match self.budget {
            Budget::Strong => Axiom::A2a,
            Budget::Weak => Axiom::A2b,
        });
        if self.sybil {
            out.push(Axiom::A3);
        }
        if let Some(c) = self.collusion {
            out.push(c);
        }
        out
    }
}

/// A symmetric rule table with values on the grid `{0, 1/L, ..., 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTable {
    pub universe: Universe,
    pub grid: u64,
    pub table: TableRule,
}

impl RuleTable {
    pub fn rule(&self) -> AllocationRule {
        AllocationRule::tabulated(self.table.clone())
    }

    /// Tabulates `rule` on the universe; every value must lie on the grid.
    pub fn restrict<R: Rule + ?Sized>(
        rule: &R,
        universe: &Universe,
        grid: u64,
    ) -> Result<Self, SearchError> {
        let mut table = TableRule::new();
        for rep in universe.sorted_representatives() {
            let alloc = rule.evaluate(&rep).map_err(AxiomError::from)?;
            let values = alloc
                .rewards()
                .iter()
                .map(|a| {
                    let r = a
                        .as_exact()
                        .filter(|r| (*r * Ratio::from_integer(grid as i128)).is_integer());
                    r.ok_or_else(|| {
                        SearchError::BadSetup(format!(
                            "{} at {rep} is not on the 1/{grid} grid",
                            rule.label()
                        ))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            table.insert(&rep, values)?;
        }
        Ok(RuleTable {
            universe: *universe,
            grid,
            table,
        })
    }

    /// `c(m) = Σ_i x_i(1^m)` for `m = 1..=max_total`.
    pub fn scaling(&self) -> Vec<Ratio> {
        (1..=self.universe.max_total)
            .map(|m| {
                let ones = vec![1u64; m as usize];
                self.table
                    .get(&ones)
                    .map(|v| v.iter().sum())
                    .unwrap_or_else(Ratio::zero)
            })
            .collect()
    }

    /// Whether every entry equals `c(m) · h_i / m` for the recovered `c`.
    pub fn is_generalized_proportional(&self) -> bool {
        let c = self.scaling();
        self.table.entries().all(|(key, values)| {
            let m: u64 = key.iter().sum();
            key.iter()
                .zip(values)
                .all(|(&h, v)| *v == c[m as usize - 1] * Ratio::new(h as i128, m as i128))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.table
            .entries()
            .all(|(_, v)| v.iter().all(Ratio::is_zero))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub axioms: Vec<Axiom>,
    pub universe: Universe,
    pub grid: u64,
    pub survivors: Vec<RuleTable>,
    /// Recovered `c(1..=m_max)` per survivor.
    pub scaling: Vec<Vec<Ratio>>,
    /// Partial tables examined.
    pub nodes: u64,
    /// What the characterization predicts, when it predicts anything.
    pub expected: Option<Vec<RuleTable>>,
    pub matches_prediction: Option<bool>,
}

enum Constraint {
    Sybil(SybilSplit),
    Collusion(CoalitionMerge, Axiom),
}

/// Rejects universes and grids the table search cannot handle.
pub fn validate_setup(universe: &Universe, grid: u64) -> Result<(), SearchError> {
    if universe.max_total > MAX_SEARCH_TOTAL {
        return Err(SearchError::TooLarge(format!(
            "total bound {} exceeds {MAX_SEARCH_TOTAL}",
            universe.max_total
        )));
    }
    if grid == 0 || grid > MAX_GRID {
        return Err(SearchError::TooLarge(format!(
            "grid 1/{grid} outside 1..={MAX_GRID}"
        )));
    }
    let lcm = lcm_upto(universe.max_total);
    if !grid.is_multiple_of(lcm) {
        return Err(SearchError::BadSetup(format!(
            "grid {grid} is not a multiple of lcm(1..{}) = {lcm}",
            universe.max_total
        )));
    }
    if universe.max_miners < universe.max_total as usize {
        return Err(SearchError::BadSetup(format!(
            "universe {universe} lacks the all-ones configuration of length {}",
            universe.max_total
        )));
    }
    Ok(())
}

/// Enumerable search space for one universe, grid and axiom set.
pub struct SearchSpace {
    universe: Universe,
    grid: u64,
    axioms: AxiomSet,
    order: Vec<Configuration>,
    candidates: Vec<Vec<Vec<Ratio>>>,
    constraints: Vec<Vec<Constraint>>,
}

fn lcm_upto(m: u64) -> u64 {
    (1..=m).fold(1, |acc, k| acc.lcm(&k))
}

impl SearchSpace {
    pub fn new(universe: Universe, grid: u64, axioms: AxiomSet) -> Result<Self, SearchError> {
        validate_setup(&universe, grid)?;
        let mut order = universe.sorted_representatives();
        order.sort_by(|a, b| {
            (a.heavy_count(), a.total())
                .cmp(&(b.heavy_count(), b.total()))
                .then_with(|| b.rates().cmp(a.rates()))
        });
        let position = |h: &Configuration| {
            let key = h.sorted_desc();
            order.iter().position(|c| *c == key)
        };

        let candidates = order
            .iter()
            .map(|h| symmetric_allocations(h, grid, axioms.budget))
            .collect();

        let mut constraints: Vec<Vec<Constraint>> = (0..order.len()).map(|_| Vec::new()).collect();
        for (i, base) in order.iter().enumerate() {
            let mut attach = |derived: &Configuration, c: Constraint| -> Result<(), SearchError> {
                let j = position(derived).ok_or_else(|| {
                    SearchError::BadSetup(format!(
                        "deviation leads to {derived} outside the universe"
                    ))
                })?;
                constraints[i.max(j)].push(c);
                Ok(())
            };
            if axioms.sybil {
                for miner in 0..base.len() {
                    for split in enumerate_sybil_splits(base, miner) {
                        let d = split.derived();
                        attach(&d, Constraint::Sybil(split))?;
                    }
                }
            }
            if let Some(grade) = axioms.collusion {
                for merge in enumerate_merges(base, 1..=base.len()) {
                    let d = merge.derived();
                    attach(&d, Constraint::Collusion(merge, grade))?;
                }
            }
        }
        Ok(SearchSpace {
            universe,
            grid,
            axioms,
            order,
            candidates,
            constraints,
        })
    }

    /// Configurations in fill order.
    pub fn order(&self) -> &[Configuration] {
        &self.order
    }

    /// Candidate allocations for the configuration at `position`.
    pub fn candidates(&self, position: usize) -> &[Vec<Ratio>] {
        &self.candidates[position]
    }

    fn violated(
        &self,
        table: &TableRule,
        position: usize,
    ) -> Result<Option<(Axiom, Witness)>, SearchError> {
        let opts = CheckOptions::risk_neutral();
        for c in &self.constraints[position] {
            match c {
                Constraint::Sybil(split) => {
                    if let Some(w) = sybil_violation(table, split)? {
                        return Ok(Some((Axiom::A3, w)));
                    }
                }
                Constraint::Collusion(merge, grade) => {
                    if let Some(w) = collusion_violation(table, merge, *grade, &opts)? {
                        return Ok(Some((*grade, w)));
                    }
                }
            }
        }
        Ok(None)
    }

    /// First constraint a complete table violates, in fill order.
    pub fn screen(&self, table: &RuleTable) -> Result<Option<(Axiom, Witness)>, SearchError> {
        for (pos, h) in self.order.iter().enumerate() {
            let values = table
                .table
                .get(h.rates())
                .ok_or_else(|| SearchError::BadSetup(format!("table lacks {h}")))?;
            let total: Ratio = values.iter().sum();
            let budget_ok = match self.axioms.budget {
                Budget::Strong => total == Ratio::one(),
                Budget::Weak => total <= Ratio::one(),
            };
            if !budget_ok {
                let axiom = match self.axioms.budget {
                    Budget::Strong => Axiom::A2a,
                    Budget::Weak => Axiom::A2b,
                };
                return Ok(Some((
                    axiom,
                    Witness::Budget {
                        config: h.clone(),
                        total: total.into(),
                    },
                )));
            }
            if let Some(v) = self.violated(&table.table, pos)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// Every table satisfying the axiom set, in canonical order.
    pub fn run(&self) -> Result<(Vec<RuleTable>, u64), SearchError> {
        let mut table = TableRule::new();
        let mut survivors = Vec::new();
        let mut nodes = 0u64;
        self.extend(0, &mut table, &mut survivors, &mut nodes)?;
        survivors.sort_by(|a: &RuleTable, b: &RuleTable| a.table.entries().cmp(b.table.entries()));
        Ok((survivors, nodes))
    }

    fn extend(
        &self,
        position: usize,
        table: &mut TableRule,
        survivors: &mut Vec<RuleTable>,
        nodes: &mut u64,
    ) -> Result<(), SearchError> {
        if position == self.order.len() {
            survivors.push(RuleTable {
                universe: self.universe,
                grid: self.grid,
                table: table.clone(),
            });
            return Ok(());
        }
        let h = &self.order[position];
        for values in &self.candidates[position] {
            *nodes += 1;
            table.insert(h, values.clone())?;
            if self.violated(table, position)?.is_none() {
                self.extend(position + 1, table, survivors, nodes)?;
            }
        }
        table.remove(h);
        Ok(())
    }
}

/// Symmetric allocations of `h` (sorted, nonincreasing) on the `1/grid` grid.
fn symmetric_allocations(h: &Configuration, grid: u64, budget: Budget) -> Vec<Vec<Ratio>> {
    let mut groups: Vec<(u64, usize)> = Vec::new();
    for &r in h.rates() {
        match groups.last_mut() {
            Some((rate, count)) if *rate == r => *count += 1,
            _ => groups.push((r, 1)),
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(groups.len());
    fn rec(
        groups: &[(u64, usize)],
        remaining: u64,
        budget: Budget,
        grid: u64,
        chosen: &mut Vec<u64>,
        out: &mut Vec<Vec<Ratio>>,
    ) {
        if chosen.len() == groups.len() {
            if budget == Budget::Weak || remaining == 0 {
                let mut values = Vec::new();
                for (&(_, count), &k) in groups.iter().zip(chosen.iter()) {
                    values.extend(core::iter::repeat_n(
                        Ratio::new(k as i128, grid as i128),
                        count,
                    ));
                }
                out.push(values);
            }
            return;
        }
        let count = groups[chosen.len()].1 as u64;
        for k in 0..=remaining / count {
            chosen.push(k);
            rec(groups, remaining - k * count, budget, grid, chosen, out);
            chosen.pop();
        }
    }
    rec(&groups, grid, budget, grid, &mut chosen, &mut out);
    out
}

/// Generalized proportional tables with on-grid entries and nondecreasing
/// on-grid `c`.
pub fn generalized_proportional_tables(universe: &Universe, grid: u64) -> Vec<RuleTable> {
    let m_max = universe.max_total;
    // c(m) = k/grid needs c(m)/m on the grid, i.e. m | k.
    let choices: Vec<Vec<i128>> = (1..=m_max as i128)
        .map(|m| (0..=grid as i128).filter(|k| k % m == 0).collect())
        .collect();
    let mut out = Vec::new();
    let mut current: Vec<i128> = Vec::new();
    fn rec(choices: &[Vec<i128>], current: &mut Vec<i128>, out: &mut Vec<Vec<i128>>) {
        if current.len() == choices.len() {
            out.push(current.clone());
            return;
        }
        let floor = current.last().copied().unwrap_or(0);
        for &k in &choices[current.len()] {
            if k >= floor {
                current.push(k);
                rec(choices, current, out);
                current.pop();
            }
        }
    }
    let mut cs = Vec::new();
    rec(&choices, &mut current, &mut cs);
    for c in cs {
        let mut table = TableRule::new();
        for rep in universe.sorted_representatives() {
            let m = rep.total() as i128;
            let cm = Ratio::new(c[m as usize - 1], grid as i128);
            let values = rep
                .rates()
                .iter()
                .map(|&h| cm * Ratio::new(h as i128, m))
                .collect();
            table
                .insert(&rep, values)
                .expect("generalized proportional tables are symmetric");
        }
        out.push(RuleTable {
            universe: *universe,
            grid,
            table,
        });
    }
    out.sort_by(|a, b| a.table.entries().cmp(b.table.entries()));
    out
}

pub fn search(
    universe: Universe,
    grid: u64,
    axioms: AxiomSet,
) -> Result<SearchReport, SearchError> {
    let space = SearchSpace::new(universe, grid, axioms)?;
    let (survivors, nodes) = space.run()?;
    let scaling = survivors.iter().map(RuleTable::scaling).collect();
    Ok(SearchReport {
        axioms: axioms.axioms(),
        universe,
        grid,
        survivors,
        scaling,
        nodes,
        expected: None,
        matches_prediction: None,
    })
}

/// Survivors of A1, A2a, A3, A4c; predicted to be the proportional table alone.
pub fn search_proportional(universe: Universe, grid: u64) -> Result<SearchReport, SearchError> {
    let mut report = search(universe, grid, AxiomSet::uniqueness())?;
    let expected = vec![RuleTable::restrict(
        &AllocationRule::proportional(),
        &universe,
        grid,
    )?];
    report.matches_prediction = Some(report.survivors == expected);
    report.expected = Some(expected);
    Ok(report)
}

/// Survivors of A1, A2b, A3, A4b; predicted to be exactly the generalized
/// proportional tables with nondecreasing `c`.
pub fn search_generalized(universe: Universe, grid: u64) -> Result<SearchReport, SearchError> {
    let mut report = search(universe, grid, AxiomSet::generalized_uniqueness())?;
    let expected = generalized_proportional_tables(&universe, grid);
    let shape_ok = report
        .survivors
        .iter()
        .all(RuleTable::is_generalized_proportional)
        && report
            .scaling
            .iter()
            .all(|c| c.windows(2).all(|w| w[0] <= w[1]));
    report.matches_prediction = Some(shape_ok && report.survivors == expected);
    report.expected = Some(expected);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityEntry {
    pub rule: String,
    pub nonzero: bool,
    /// First violated axiom among A1, A2b, A3 and utility-A4c.
    pub violation: Option<AxiomVerdict>,
    /// Whether the collusion witness merges exactly two miners.
    pub two_way: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityReport {
    pub universe: Universe,
    pub utility: String,
    pub entries: Vec<ImpossibilityEntry>,
}

impl ImpossibilityReport {
    /// Every nonzero rule violates something, and rules that pass A1, A2b
    /// and A3 are caught by a two-miner merge.
    pub fn holds(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !e.nonzero || (e.violation.is_some() && e.two_way != Some(false)))
    }
}

/// With a strictly concave utility, no nonzero rule satisfies A1, A2b, A3
/// and utility-A4c; finds a violation for each rule.
pub fn verify_risk_averse(
    universe: &Universe,
    rules: &[AllocationRule],
    utility: &UtilityFunction,
) -> Result<ImpossibilityReport, AxiomError> {
    verify_risk_averse_with(universe, rules, utility, &check)
}

pub fn verify_risk_averse_with(
    universe: &Universe,
    rules: &[AllocationRule],
    utility: &UtilityFunction,
    check: Checker<'_>,
) -> Result<ImpossibilityReport, AxiomError> {
    if utility.shape() != Shape::StrictlyConcave {
        return Err(AxiomError::BadDeviation(format!(
            "{utility} is {}, not strictly concave",
            utility.shape()
        )));
    }
    let mut entries = Vec::with_capacity(rules.len());
    for rule in rules {
        let mut nonzero = false;
        for h in universe.configurations() {
            if !rule.evaluate(&h)?.is_zero() {
                nonzero = true;
                break;
            }
        }
        let mut entry = ImpossibilityEntry {
            rule: rule.label(),
            nonzero,
            violation: None,
            two_way: None,
        };
        if nonzero {
            let neutral = CheckOptions::risk_neutral();
            for axiom in [Axiom::A1, Axiom::A2b, Axiom::A3] {
                let v = check(rule, universe, axiom, &neutral)?;
                if !v.passed() {
                    entry.violation = Some(v);
                    break;
                }
            }
            if entry.violation.is_none() {
                let pairs =
                    CheckOptions::with_utilities(vec![utility.clone()]).with_coalition_sizes(2, 2);
                let mut v = check(rule, universe, Axiom::A4c, &pairs)?;
                entry.two_way = Some(true);
                if v.passed() {
                    v = check(
                        rule,
                        universe,
                        Axiom::A4c,
                        &CheckOptions::with_utilities(vec![utility.clone()]),
                    )?;
                    entry.two_way = Some(false);
                }
                if !v.passed() {
                    entry.violation = Some(v);
                } else {
                    entry.two_way = None;
                }
            }
        }
        entries.push(entry);
    }
    Ok(ImpossibilityReport {
        universe: *universe,
        utility: utility.to_string(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PossibilityEntry {
    pub utility: String,
    pub shape: Shape,
    /// Convex and linear utilities are predicted to pass.
    pub expected_pass: bool,
    pub verdict: AxiomVerdict,
}

impl PossibilityEntry {
    pub fn matches(&self) -> bool {
        self.verdict.passed() == self.expected_pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PossibilityReport {
    pub universe: Universe,
    pub family: String,
    /// A1, A2a and A3 for the proportional rule.
    pub baseline: Vec<AxiomVerdict>,
    pub entries: Vec<PossibilityEntry>,
}

impl PossibilityReport {
    pub fn holds(&self) -> bool {
        self.baseline.iter().all(AxiomVerdict::passed)
            && self.entries.iter().all(PossibilityEntry::matches)
    }
}

/// Utility-A4a for the randomized proportional rule against each utility
/// and the given sharing family. Concave utilities act as negative controls.
pub fn verify_risk_seeking(
    universe: &Universe,
    utilities: &[UtilityFunction],
    family: SharingFamily,
) -> Result<PossibilityReport, AxiomError> {
    verify_risk_seeking_with(universe, utilities, family, &check)
}

pub fn verify_risk_seeking_with(
    universe: &Universe,
    utilities: &[UtilityFunction],
    family: SharingFamily,
    check: Checker<'_>,
) -> Result<PossibilityReport, AxiomError> {
    let rule = AllocationRule::proportional();
    let neutral = CheckOptions::risk_neutral();
    let baseline = [Axiom::A1, Axiom::A2a, Axiom::A3]
        .iter()
        .map(|&a| check(&rule, universe, a, &neutral))
        .collect::<Result<Vec<_>, _>>()?;
    let entries = utilities
        .iter()
        .map(|u| {
            let opts = CheckOptions {
                utilities: Some(vec![u.clone()]),
                family,
                coalition_sizes: None,
            };
            Ok(PossibilityEntry {
                utility: u.to_string(),
                shape: u.shape(),
                expected_pass: u.shape() != Shape::StrictlyConcave,
                verdict: check(&rule, universe, Axiom::A4a, &opts)?,
            })
        })
        .collect::<Result<Vec<_>, AxiomError>>()?;
    Ok(PossibilityReport {
        universe: *universe,
        family: family.to_string(),
        baseline,
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterministicEntry {
    pub utility: String,
    pub deterministic: AxiomVerdict,
    pub risk_neutral: AxiomVerdict,
}

impl DeterministicEntry {
    pub fn agrees(&self) -> bool {
        self.deterministic.passed() == self.risk_neutral.passed()
    }
}

/// Utility-A4c of `rule` paid deterministically, next to its risk-neutral
/// verdict, for each utility.
pub fn verify_deterministic(
    universe: &Universe,
    rule: &AllocationRule,
    utilities: &[UtilityFunction],
) -> Result<Vec<DeterministicEntry>, AxiomError> {
    verify_deterministic_with(universe, rule, utilities, &check)
}

pub fn verify_deterministic_with(
    universe: &Universe,
    rule: &AllocationRule,
    utilities: &[UtilityFunction],
    check: Checker<'_>,
) -> Result<Vec<DeterministicEntry>, AxiomError> {
    let deterministic = rule
        .clone()
        .with_semantics(crate::rules::Semantics::Deterministic);
    let risk_neutral = check(rule, universe, Axiom::A4c, &CheckOptions::risk_neutral())?;
    utilities
        .iter()
        .map(|u| {
            Ok(DeterministicEntry {
                utility: u.to_string(),
                deterministic: check(
                    &deterministic,
                    universe,
                    Axiom::A4c,
                    &CheckOptions::with_utilities(vec![u.clone()]),
                )?,
                risk_neutral: risk_neutral.clone(),
            })
        })
        .collect()
}

/// Distinct nonzero survivors of a table search as tabulated rules.
pub fn survivor_rules(report: &SearchReport) -> Vec<AllocationRule> {
    let mut seen = BTreeSet::new();
    report
        .survivors
        .iter()
        .filter(|t| !t.is_zero())
        .filter(|t| seen.insert(format!("{:?}", t.table)))
        .map(RuleTable::rule)
        .collect()
}

impl RuleKind {
    pub fn is_table(&self) -> bool {
        matches!(self, RuleKind::Tabulated(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_candidates_respect_budget() {
        let h = Configuration::new(vec![2, 1]).unwrap();
        assert_eq!(symmetric_allocations(&h, 6, Budget::Strong).len(), 7);
        assert_eq!(symmetric_allocations(&h, 6, Budget::Weak).len(), 28);
        let ones = Configuration::new(vec![1, 1, 1]).unwrap();
        assert_eq!(
            symmetric_allocations(&ones, 6, Budget::Strong),
            vec![vec![Ratio::new(1, 3); 3]]
        );
        assert_eq!(symmetric_allocations(&ones, 6, Budget::Weak).len(), 3);
    }

    #[test]
    fn setup_guards() {
        let big = Universe::new(6, 6).unwrap();
        assert!(matches!(
            SearchSpace::new(big, 60, AxiomSet::uniqueness()),
            Err(SearchError::TooLarge(_))
        ));
        let u = Universe::new(3, 3).unwrap();
        assert!(matches!(
            SearchSpace::new(u, 4, AxiomSet::uniqueness()),
            Err(SearchError::BadSetup(_))
        ));
        assert!(matches!(
            SearchSpace::new(u, 120, AxiomSet::uniqueness()),
            Err(SearchError::TooLarge(_))
        ));
        let narrow = Universe::new(2, 3).unwrap();
        assert!(matches!(
            SearchSpace::new(narrow, 6, AxiomSet::uniqueness()),
            Err(SearchError::BadSetup(_))
        ));
    }

    #[test]
    fn fill_order_follows_heavy_entries() {
        let space =
            SearchSpace::new(Universe::new(3, 3).unwrap(), 6, AxiomSet::uniqueness()).unwrap();
        let order: Vec<Vec<u64>> = space.order().iter().map(|h| h.rates().to_vec()).collect();
        assert_eq!(
            order,
            vec![
                vec![1],
                vec![1, 1],
                vec![1, 1, 1],
                vec![2],
                vec![3],
                vec![2, 1]
            ]
        );
    }

    #[test]
    fn generalized_table_count() {
        // c(1) in {0..6}/6, c(2) in {0,2,4,6}/6, c(3) in {0,3,6}/6, nondecreasing.
        let tables = generalized_proportional_tables(&Universe::new(3, 3).unwrap(), 6);
        assert_eq!(tables.len(), 21);
        assert!(tables.iter().all(RuleTable::is_generalized_proportional));
    }
}
