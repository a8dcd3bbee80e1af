//! Exhaustive axiom checking over a bounded universe.
//!
//! Every check walks the universe in [`Universe::configurations`] order and,
//! for each base configuration, the deviations in their enumeration order.
//! The first violation found is returned as the witness, so verdicts do not
//! depend on how the work is scheduled.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amount::{Amount, BUDGET_TOLERANCE, STRICT_TOLERANCE};
use crate::config::{Allocation, Configuration};
use crate::deviation::{
    enumerate_merges, enumerate_sybil_splits, CoalitionMerge, SharingFamily, SharingScheme,
    SybilSplit,
};
use crate::error::AxiomError;
use crate::rules::{AllocationRule, Rule, Semantics};
use crate::universe::Universe;
use crate::utility::{member_share, utility_after, utility_before, MemberOutcome, UtilityFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    /// Symmetry.
    A1,
    /// Strong budget balance.
    A2a,
    /// Weak budget balance.
    A2b,
    /// Sybil-proofness.
    A3,
    /// Collusion-proofness under arbitrary reward sharing.
    A4a,
    /// Strong collusion-proofness under proportional sharing.
    A4b,
    /// Weak collusion-proofness under proportional sharing.
    A4c,
}

impl Axiom {
    pub const ALL: [Axiom; 7] = [
        Axiom::A1,
        Axiom::A2a,
        Axiom::A2b,
        Axiom::A3,
        Axiom::A4a,
        Axiom::A4b,
        Axiom::A4c,
    ];

    pub fn is_collusion(self) -> bool {
        matches!(self, Axiom::A4a | Axiom::A4b | Axiom::A4c)
    }

    pub fn name(self) -> &'static str {
        match self {
            Axiom::A1 => "symmetry",
            Axiom::A2a => "strong budget balance",
            Axiom::A2b => "weak budget balance",
            Axiom::A3 => "sybil-proofness",
            Axiom::A4a => "collusion-proofness (arbitrary sharing)",
            Axiom::A4b => "strong collusion-proofness (proportional sharing)",
            Axiom::A4c => "weak collusion-proofness (proportional sharing)",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::A1 => "A1",
            Axiom::A2a => "A2a",
            Axiom::A2b => "A2b",
            Axiom::A3 => "A3",
            Axiom::A4a => "A4a",
            Axiom::A4b => "A4b",
            Axiom::A4c => "A4c",
        })
    }
}

impl FromStr for Axiom {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axiom::ALL
            .iter()
            .copied()
            .find(|a| a.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown axiom `{s}` (expected A1, A2a, A2b, A3, A4a, A4b or A4c)")
            })
    }
}

/// Knobs for the utility-aware and arbitrary-sharing checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckOptions {
    /// Class of allowed utilities; every coalition member may pick any of
    /// them. `None` means risk-neutral miners.
    pub utilities: Option<Vec<UtilityFunction>>,
    /// Schemes searched by A4a when utilities are given.
    pub family: SharingFamily,
    /// Restricts coalition sizes (inclusive) for collusion checks.
    pub coalition_sizes: Option<(usize, usize)>,
}

impl CheckOptions {
    pub fn risk_neutral() -> Self {
        Self::default()
    }

    pub fn with_utilities(utilities: Vec<UtilityFunction>) -> Self {
        CheckOptions {
            utilities: Some(utilities),
            ..Self::default()
        }
    }

    pub fn with_coalition_sizes(mut self, min: usize, max: usize) -> Self {
        self.coalition_sizes = Some((min, max));
        self
    }
}

/// A concrete counterexample to an axiom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Asymmetry {
        config: Configuration,
        permutation: Vec<usize>,
        /// `x(π(h))`.
        direct: Allocation,
        /// `π(x(h))`.
        permuted: Allocation,
    },
    Budget {
        config: Configuration,
        total: Amount,
    },
    Sybil {
        split: SybilSplit,
        original: Amount,
        sybil_total: Amount,
    },
    Collusion {
        merge: CoalitionMerge,
        /// `None` for the transferable-reward comparison of totals.
        scheme: Option<SharingScheme>,
        coalition_reward: Amount,
        original_total: Amount,
        members: Vec<MemberOutcome>,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Asymmetry {
                config,
                permutation,
                direct,
                permuted,
            } => write!(
                f,
                "h={config}, π={permutation:?}: x(π h)={direct} but π x(h)={permuted}"
            ),
            Witness::Budget { config, total } => write!(f, "h={config}: Σx = {total}"),
            Witness::Sybil {
                split,
                original,
                sybil_total,
            } => write!(f, "{split}: sybils earn {sybil_total} > {original}"),
            Witness::Collusion {
                merge,
                scheme,
                coalition_reward,
                original_total,
                members,
            } => {
                write!(
                    f,
                    "{merge}: x_i*(h')={coalition_reward}, Σ_T x(h)={original_total}"
                )?;
                if let Some(s) = scheme {
                    write!(f, ", sharing {s}")?;
                }
                for m in members {
                    write!(f, "; miner {} {} -> {}", m.miner, m.before, m.after)?;
                    if let Some(u) = &m.utility {
                        write!(f, " [{u}]")?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail(Witness),
}

/// Bounds under which a verdict holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictScope {
    pub universe: Universe,
    pub semantics: Semantics,
    pub utilities: Option<Vec<String>>,
    pub sharing_family: Option<String>,
    pub coalition_sizes: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    pub rule: String,
    pub scope: VerdictScope,
    pub outcome: Outcome,
}

impl AxiomVerdict {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Outcome::Pass)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match &self.outcome {
            Outcome::Pass => None,
            Outcome::Fail(w) => Some(w),
        }
    }

    /// Re-evaluates the witness against `rule` from scratch and returns the
    /// margin by which the axiom is violated.
    pub fn replay<R: Rule + ?Sized>(&self, rule: &R) -> Result<f64, AxiomError> {
        match &self.outcome {
            Outcome::Pass => Err(AxiomError::NotReproduced("verdict is a pass".into())),
            Outcome::Fail(w) => replay(rule, self.axiom, w),
        }
    }
}

impl fmt::Display for AxiomVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} over {}: ",
            self.rule, self.axiom, self.scope.universe
        )?;
        match &self.outcome {
            Outcome::Pass => f.write_str("PASS"),
            Outcome::Fail(w) => write!(f, "FAIL ({w})"),
        }
    }
}

fn scope<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
    axiom: Axiom,
    opts: &CheckOptions,
) -> VerdictScope {
    let utilities = if axiom.is_collusion() {
        opts.utilities
            .as_ref()
            .map(|us| us.iter().map(ToString::to_string).collect())
    } else {
        None
    };
    let sharing_family = match (axiom, &opts.utilities) {
        (Axiom::A4a, Some(_)) => Some(opts.family.to_string()),
        (Axiom::A4a, None) => Some("arbitrary (transferable) sharing".to_string()),
        (Axiom::A4b | Axiom::A4c, _) => Some("proportional".to_string()),
        _ => None,
    };
    VerdictScope {
        universe: *universe,
        semantics: rule.semantics(),
        utilities,
        sharing_family,
        coalition_sizes: if axiom.is_collusion() {
            opts.coalition_sizes
        } else {
            None
        },
    }
}

/// Signature shared by [`check`] and drop-in replacements such as parallel
/// checkers; every implementation must return the verdict `check` would.
pub type Checker<'a> = &'a (dyn Fn(&AllocationRule, &Universe, Axiom, &CheckOptions) -> Result<AxiomVerdict, AxiomError>
         + Sync);

/// Checks `axiom` on every configuration of `universe`.
pub fn check<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
    axiom: Axiom,
    opts: &CheckOptions,
) -> Result<AxiomVerdict, AxiomError> {
    let mut outcome = Outcome::Pass;
    for h in universe.configurations() {
        if let Some(w) = violation_at(rule, &h, axiom, opts)? {
            outcome = Outcome::Fail(w);
            break;
        }
    }
    Ok(AxiomVerdict {
        axiom,
        rule: rule.label(),
        scope: scope(rule, universe, axiom, opts),
        outcome,
    })
}

/// Assembles a verdict from per-configuration results listed in universe
/// order, for callers that evaluate configurations in parallel.
pub fn verdict_from_results<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
    axiom: Axiom,
    opts: &CheckOptions,
    results: Vec<Result<Option<Witness>, AxiomError>>,
) -> Result<AxiomVerdict, AxiomError> {
    let mut outcome = Outcome::Pass;
    for r in results {
        if let Some(w) = r? {
            outcome = Outcome::Fail(w);
            break;
        }
    }
    Ok(AxiomVerdict {
        axiom,
        rule: rule.label(),
        scope: scope(rule, universe, axiom, opts),
        outcome,
    })
}

pub fn check_symmetry<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
) -> Result<AxiomVerdict, AxiomError> {
    check(rule, universe, Axiom::A1, &CheckOptions::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetMode {
    Strong,
    Weak,
}

pub fn check_budget<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
    mode: BudgetMode,
) -> Result<AxiomVerdict, AxiomError> {
    let axiom = match mode {
        BudgetMode::Strong => Axiom::A2a,
        BudgetMode::Weak => Axiom::A2b,
    };
    check(rule, universe, axiom, &CheckOptions::default())
}

pub fn check_sybil_proofness<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
) -> Result<AxiomVerdict, AxiomError> {
    check(rule, universe, Axiom::A3, &CheckOptions::default())
}

/// Collusion check of grade A4a, A4b or A4c, optionally against a class of
/// utilities.
pub fn check_collusion<R: Rule + ?Sized>(
    rule: &R,
    universe: &Universe,
    grade: Axiom,
    utilities: Option<Vec<UtilityFunction>>,
) -> Result<AxiomVerdict, AxiomError> {
    if !grade.is_collusion() {
        return Err(AxiomError::BadDeviation(format!(
            "{grade} is not a collusion grade"
        )));
    }
    let opts = CheckOptions {
        utilities,
        ..CheckOptions::default()
    };
    check(rule, universe, grade, &opts)
}

/// First violation of `axiom` with base configuration `h`, if any.
pub fn violation_at<R: Rule + ?Sized>(
    rule: &R,
    h: &Configuration,
    axiom: Axiom,
    opts: &CheckOptions,
) -> Result<Option<Witness>, AxiomError> {
    match axiom {
        Axiom::A1 => symmetry_at(rule, h),
        Axiom::A2a => budget_at(rule, h, BudgetMode::Strong),
        Axiom::A2b => budget_at(rule, h, BudgetMode::Weak),
        Axiom::A3 => {
            let original = rule.evaluate(h)?;
            for miner in 0..h.len() {
                for split in enumerate_sybil_splits(h, miner) {
                    if let Some(w) = sybil_violation_given(rule, &split, &original)? {
                        return Ok(Some(w));
                    }
                }
            }
            Ok(None)
        }
        Axiom::A4a | Axiom::A4b | Axiom::A4c => {
            let (lo, hi) = opts.coalition_sizes.unwrap_or((1, h.len()));
            let original = rule.evaluate(h)?;
            for merge in enumerate_merges(h, lo..=hi) {
                if let Some(w) = collusion_violation_given(rule, &merge, axiom, opts, &original)? {
                    return Ok(Some(w));
                }
            }
            Ok(None)
        }
    }
}

fn transposition(n: usize, i: usize, j: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.swap(i, j);
    p
}

fn symmetry_at<R: Rule + ?Sized>(
    rule: &R,
    h: &Configuration,
) -> Result<Option<Witness>, AxiomError> {
    let x = rule.evaluate(h)?;
    let n = h.len();
    for i in 0..n {
        for j in i + 1..n {
            let perm = transposition(n, i, j);
            if let Some(w) = asymmetry(rule, h, &x, &perm)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn asymmetry<R: Rule + ?Sized>(
    rule: &R,
    h: &Configuration,
    x: &Allocation,
    perm: &[usize],
) -> Result<Option<Witness>, AxiomError> {
    let direct = rule.evaluate(&h.permuted(perm))?;
    let permuted = Allocation::new(perm.iter().map(|&k| x.get(k)).collect());
    let differs = direct.len() != permuted.len()
        || direct
            .rewards()
            .iter()
            .zip(permuted.rewards())
            .any(|(a, b)| a.compare(b) != Ordering::Equal);
    Ok(differs.then(|| Witness::Asymmetry {
        config: h.clone(),
        permutation: perm.to_vec(),
        direct,
        permuted,
    }))
}

fn budget_at<R: Rule + ?Sized>(
    rule: &R,
    h: &Configuration,
    mode: BudgetMode,
) -> Result<Option<Witness>, AxiomError> {
    let total = rule.evaluate(h)?.total();
    let cmp = total.compare_within(&Amount::one(), BUDGET_TOLERANCE);
    let violated = match mode {
        BudgetMode::Strong => cmp != Ordering::Equal,
        BudgetMode::Weak => cmp == Ordering::Greater,
    };
    Ok(violated.then(|| Witness::Budget {
        config: h.clone(),
        total,
    }))
}

/// Checks the sybil inequality for one split.
pub fn sybil_violation<R: Rule + ?Sized>(
    rule: &R,
    split: &SybilSplit,
) -> Result<Option<Witness>, AxiomError> {
    let original = rule.evaluate(&split.base)?;
    sybil_violation_given(rule, split, &original)
}

fn sybil_violation_given<R: Rule + ?Sized>(
    rule: &R,
    split: &SybilSplit,
    original: &Allocation,
) -> Result<Option<Witness>, AxiomError> {
    let after = rule.evaluate(&split.derived())?;
    let sybil_total = Amount::sum(&after.rewards()[split.sybil_indices()]);
    let before = original.get(split.miner);
    Ok(sybil_total
        .strictly_greater(&before)
        .then(|| Witness::Sybil {
            split: split.clone(),
            original: before,
            sybil_total,
        }))
}

/// Checks one merge against a collusion grade.
pub fn collusion_violation<R: Rule + ?Sized>(
    rule: &R,
    merge: &CoalitionMerge,
    grade: Axiom,
    opts: &CheckOptions,
) -> Result<Option<Witness>, AxiomError> {
    let original = rule.evaluate(&merge.base)?;
    collusion_violation_given(rule, merge, grade, opts, &original)
}

/// Per-member improvement status across a class of utilities.
struct MemberOptions {
    /// First utility (index) under which the member does not strictly lose.
    weak: Option<usize>,
    /// First utility under which the member strictly gains.
    strict: Option<usize>,
}

fn collusion_violation_given<R: Rule + ?Sized>(
    rule: &R,
    merge: &CoalitionMerge,
    grade: Axiom,
    opts: &CheckOptions,
    original: &Allocation,
) -> Result<Option<Witness>, AxiomError> {
    let derived = rule.evaluate(&merge.derived())?;
    let coalition_reward = derived.get(merge.merged_index());
    let original_total = Amount::sum(merge.members.iter().map(|&m| &original.rewards()[m]));
    let semantics = rule.semantics();

    let linear = [UtilityFunction::linear()];
    let class: &[UtilityFunction] = opts.utilities.as_deref().unwrap_or(&linear);
    let risk_neutral = opts.utilities.is_none();

    if grade == Axiom::A4a && risk_neutral {
        // Transferable rewards: a Pareto improvement exists iff the total grows.
        if !coalition_reward.strictly_greater(&original_total) {
            return Ok(None);
        }
        let members = members_under(
            merge,
            &SharingScheme::Proportional,
            &[0].repeat(merge.members.len()),
            class,
            risk_neutral,
            semantics,
            coalition_reward,
            original,
        )?;
        return Ok(Some(Witness::Collusion {
            merge: merge.clone(),
            scheme: None,
            coalition_reward,
            original_total,
            members,
        }));
    }

    let before: Vec<Vec<Amount>> = merge
        .members
        .iter()
        .map(|&m| {
            class
                .iter()
                .map(|u| utility_before(u, semantics, original.get(m)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut found: Option<(SharingScheme, Vec<usize>)> = None;
    let mut failure: Option<AxiomError> = None;
    let mut examine = |scheme: &SharingScheme| -> bool {
        let mut options = Vec::with_capacity(merge.members.len());
        for slot in 0..merge.members.len() {
            let share = member_share(merge, scheme, slot);
            let mut opt = MemberOptions {
                weak: None,
                strict: None,
            };
            for (k, u) in class.iter().enumerate() {
                let after = match utility_after(u, semantics, coalition_reward, share) {
                    Ok(a) => a,
                    Err(e) => {
                        failure = Some(e.into());
                        return true;
                    }
                };
                match after.compare(&before[slot][k]) {
                    Ordering::Greater => {
                        opt.strict.get_or_insert(k);
                        opt.weak.get_or_insert(k);
                    }
                    Ordering::Equal => {
                        opt.weak.get_or_insert(k);
                    }
                    Ordering::Less => {}
                }
            }
            options.push(opt);
        }
        let choice = match grade {
            Axiom::A4c => options.iter().map(|o| o.strict).collect::<Option<Vec<_>>>(),
            _ => {
                let all_weak = options.iter().all(|o| o.weak.is_some());
                match options.iter().position(|o| o.strict.is_some()) {
                    Some(gainer) if all_weak => Some(
                        options
                            .iter()
                            .enumerate()
                            .map(|(i, o)| {
                                if i == gainer {
                                    o.strict.unwrap()
                                } else {
                                    o.weak.unwrap()
                                }
                            })
                            .collect(),
                    ),
                    _ => None,
                }
            }
        };
        match choice {
            Some(c) => {
                found = Some((scheme.clone(), c));
                true
            }
            None => false,
        }
    };
    if grade == Axiom::A4a {
        opts.family
            .for_each_scheme(merge.members.len(), &mut examine);
    } else {
        examine(&SharingScheme::Proportional);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let Some((scheme, choice)) = found else {
        return Ok(None);
    };
    let members = members_under(
        merge,
        &scheme,
        &choice,
        class,
        risk_neutral,
        semantics,
        coalition_reward,
        original,
    )?;
    Ok(Some(Witness::Collusion {
        merge: merge.clone(),
        scheme: Some(scheme),
        coalition_reward,
        original_total,
        members,
    }))
}

#[allow(clippy::too_many_arguments)]
fn members_under(
    merge: &CoalitionMerge,
    scheme: &SharingScheme,
    choice: &[usize],
    class: &[UtilityFunction],
    risk_neutral: bool,
    semantics: Semantics,
    coalition_reward: Amount,
    original: &Allocation,
) -> Result<Vec<MemberOutcome>, AxiomError> {
    merge
        .members
        .iter()
        .enumerate()
        .map(|(slot, &miner)| {
            let u = &class[choice[slot]];
            let share = member_share(merge, scheme, slot);
            Ok(MemberOutcome {
                miner,
                utility: (!risk_neutral).then(|| u.clone()),
                before: utility_before(u, semantics, original.get(miner))?,
                after: utility_after(u, semantics, coalition_reward, share)?,
            })
        })
        .collect()
}

/// Replays `witness` against `rule` and returns the violation margin.
///
/// Only the deviation, the sharing scheme and the member utilities are taken
/// from the witness; every reward and utility is recomputed.
pub fn replay<R: Rule + ?Sized>(
    rule: &R,
    axiom: Axiom,
    witness: &Witness,
) -> Result<f64, AxiomError> {
    let not = |msg: String| Err(AxiomError::NotReproduced(msg));
    match (axiom, witness) {
        (
            Axiom::A1,
            Witness::Asymmetry {
                config,
                permutation,
                ..
            },
        ) => {
            let x = rule.evaluate(config)?;
            match asymmetry(rule, config, &x, permutation)? {
                Some(Witness::Asymmetry {
                    direct, permuted, ..
                }) => Ok(direct
                    .rewards()
                    .iter()
                    .zip(permuted.rewards())
                    .map(|(a, b)| libm::fabs(a.to_f64() - b.to_f64()))
                    .fold(0.0, f64::max)),
                _ => not(format!("{config} is symmetric under {permutation:?}")),
            }
        }
        (Axiom::A2a | Axiom::A2b, Witness::Budget { config, .. }) => {
            let mode = if axiom == Axiom::A2a {
                BudgetMode::Strong
            } else {
                BudgetMode::Weak
            };
            match budget_at(rule, config, mode)? {
                Some(Witness::Budget { total, .. }) => Ok(match mode {
                    BudgetMode::Strong => libm::fabs(total.to_f64() - 1.0),
                    BudgetMode::Weak => total.to_f64() - 1.0,
                }),
                _ => not(format!("budget holds at {config}")),
            }
        }
        (Axiom::A3, Witness::Sybil { split, .. }) => {
            let split =
                SybilSplit::new(split.base.clone(), split.miner, split.replacement.clone())?;
            match sybil_violation(rule, &split)? {
                Some(Witness::Sybil {
                    original,
                    sybil_total,
                    ..
                }) => Ok(sybil_total.to_f64() - original.to_f64()),
                _ => not(format!("split {split} is not profitable")),
            }
        }
        (
            Axiom::A4a | Axiom::A4b | Axiom::A4c,
            Witness::Collusion {
                merge,
                scheme,
                members,
                ..
            },
        ) => {
            let merge =
                CoalitionMerge::new(merge.base.clone(), merge.members.clone(), merge.merged_rate)?;
            let original = rule.evaluate(&merge.base)?;
            let coalition_reward = rule.evaluate(&merge.derived())?.get(merge.merged_index());
            let Some(scheme) = scheme else {
                if axiom != Axiom::A4a {
                    return not("proportional-sharing grades need an explicit scheme".into());
                }
                let total = Amount::sum(merge.members.iter().map(|&m| &original.rewards()[m]));
                if !coalition_reward.strictly_greater(&total) {
                    return not(format!(
                        "merge {merge} does not increase the coalition total"
                    ));
                }
                return Ok(coalition_reward.to_f64() - total.to_f64());
            };
            if axiom != Axiom::A4a && *scheme != SharingScheme::Proportional {
                return not(format!(
                    "{axiom} is defined under proportional sharing only"
                ));
            }
            scheme.validate(merge.members.len())?;
            if members.len() != merge.members.len() {
                return not("member list does not match the coalition".into());
            }
            let semantics = rule.semantics();
            let mut gains = Vec::with_capacity(members.len());
            for (slot, m) in members.iter().enumerate() {
                let u = m.utility.clone().unwrap_or_else(UtilityFunction::linear);
                let before = utility_before(&u, semantics, original.get(merge.members[slot]))?;
                let after = utility_after(
                    &u,
                    semantics,
                    coalition_reward,
                    member_share(&merge, scheme, slot),
                )?;
                gains.push((after.compare(&before), after.to_f64() - before.to_f64()));
            }
            let violated = match axiom {
                Axiom::A4c => gains.iter().all(|g| g.0 == Ordering::Greater),
                _ => {
                    gains.iter().all(|g| g.0 != Ordering::Less)
                        && gains.iter().any(|g| g.0 == Ordering::Greater)
                }
            };
            if !violated {
                return not(format!(
                    "merge {merge} is not an improving deviation under {axiom}"
                ));
            }
            Ok(match axiom {
                Axiom::A4c => gains.iter().map(|g| g.1).fold(f64::INFINITY, f64::min),
                _ => gains.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max),
            })
        }
        _ => not(format!("witness kind does not match axiom {axiom}")),
    }
}

/// Strictness threshold used for float margins, re-exported for reports.
pub const MARGIN_THRESHOLD: f64 = STRICT_TOLERANCE;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::AllocationRule;
    use alloc::vec;

    fn cfg(r: &[u64]) -> Configuration {
        Configuration::new(r.to_vec()).unwrap()
    }

    #[test]
    fn axiom_ids_parse() {
        for a in Axiom::ALL {
            assert_eq!(a.to_string().parse::<Axiom>().unwrap(), a);
        }
        assert_eq!("a4c".parse::<Axiom>().unwrap(), Axiom::A4c);
        assert!("A5".parse::<Axiom>().is_err());
    }

    #[test]
    fn sybil_witness_for_square_roots() {
        let rule = AllocationRule::square_roots();
        let split = SybilSplit::new(cfg(&[4, 1]), 0, vec![1, 1, 1, 1]).unwrap();
        let Some(Witness::Sybil {
            original,
            sybil_total,
            ..
        }) = sybil_violation(&rule, &split).unwrap()
        else {
            panic!("expected a violation");
        };
        assert!((sybil_total.to_f64() - 0.8).abs() < 1e-12);
        assert!((original.to_f64() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn collusion_requires_collusion_grade() {
        let u = Universe::new(2, 2).unwrap();
        assert!(check_collusion(&AllocationRule::proportional(), &u, Axiom::A3, None).is_err());
    }

    #[test]
    fn replay_rejects_mismatched_witness() {
        let rule = AllocationRule::proportional();
        let w = Witness::Budget {
            config: cfg(&[1, 1]),
            total: Amount::one(),
        };
        assert!(replay(&rule, Axiom::A2a, &w).is_err());
        assert!(replay(&rule, Axiom::A3, &w).is_err());
    }
}
