//! Von Neumann–Morgenstern utilities over block rewards in `[0, 1]` and the
//! expected utilities of coalition members before and after a merge.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::amount::{format_ratio, parse_ratio, ratio_to_f64, Amount, Ratio, BUDGET_TOLERANCE};
use crate::deviation::{CoalitionMerge, SharingScheme};
use crate::error::{AxiomError, UtilityError};
use crate::rules::{Rule, Semantics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Linear,
    StrictlyConcave,
    StrictlyConvex,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Linear => "linear",
            Shape::StrictlyConcave => "strictly-concave",
            Shape::StrictlyConvex => "strictly-convex",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityForm {
    /// `U(p) = p^alpha`.
    Power(Ratio),
    /// Linear interpolation through `(p, U(p))` knots from `(0, 0)` to `p = 1`.
    PiecewiseLinear(Vec<(Ratio, Ratio)>),
}

/// A strictly increasing utility with `U(0) = 0`, tagged by curvature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "UtilityForm", into = "UtilityForm")]
pub struct UtilityFunction {
    form: UtilityForm,
    shape: Shape,
}

impl UtilityFunction {
    pub fn power(alpha: Ratio) -> Result<Self, UtilityError> {
        if alpha <= Ratio::zero() {
            return Err(UtilityError::BadExponent(format_ratio(&alpha)));
        }
        let one = Ratio::one();
        let shape = if alpha < one {
            Shape::StrictlyConcave
        } else if alpha == one {
            Shape::Linear
        } else {
            Shape::StrictlyConvex
        };
        Ok(UtilityFunction {
            form: UtilityForm::Power(alpha),
            shape,
        })
    }

    /// `U(p) = p`.
    pub fn linear() -> Self {
        Self::power(Ratio::one()).expect("exponent 1 is valid")
    }

    pub fn piecewise_linear(mut knots: Vec<(Ratio, Ratio)>) -> Result<Self, UtilityError> {
        let bad = |m: &str| Err(UtilityError::BadKnots(m.into()));
        if knots.first().map(|k| k.0) != Some(Ratio::zero()) {
            knots.insert(0, (Ratio::zero(), Ratio::zero()));
        }
        if knots[0].1 != Ratio::zero() {
            return bad("U(0) must be 0");
        }
        if knots.len() < 2 {
            return bad("need at least one knot besides the origin");
        }
        if knots.last().map(|k| k.0) != Some(Ratio::one()) {
            return bad("last knot must be at p = 1");
        }
        let mut slopes = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad("knot positions must be strictly increasing");
            }
            if w[1].1 <= w[0].1 {
                return bad("utility must be strictly increasing");
            }
            slopes.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        }
        let shape = if slopes.windows(2).all(|s| s[0] == s[1]) {
            Shape::Linear
        } else if slopes.windows(2).all(|s| s[1] < s[0]) {
            Shape::StrictlyConcave
        } else if slopes.windows(2).all(|s| s[1] > s[0]) {
            Shape::StrictlyConvex
        } else {
            return bad("slopes must be constant, decreasing, or increasing");
        };
        Ok(UtilityFunction {
            form: UtilityForm::PiecewiseLinear(knots),
            shape,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn form(&self) -> &UtilityForm {
        &self.form
    }

    /// `U(p)`; exact for rational `p` when the form allows it.
    pub fn value(&self, p: Amount) -> Result<Amount, UtilityError> {
        let p = check_reward(p)?;
        if let Amount::Exact(r) = p {
            if r.is_zero() {
                return Ok(Amount::zero());
            }
        }
        match &self.form {
            UtilityForm::Power(alpha) => {
                if let (Amount::Exact(r), true) = (p, alpha.is_integer()) {
                    if let Some(v) = checked_pow(r, *alpha.numer()) {
                        return Ok(Amount::Exact(v));
                    }
                }
                if let Amount::Exact(r) = p {
                    if r.is_one() {
                        return Ok(Amount::one());
                    }
                }
                Ok(Amount::Approx(libm::pow(p.to_f64(), ratio_to_f64(alpha))))
            }
            UtilityForm::PiecewiseLinear(knots) => {
                let seg = knots
                    .windows(2)
                    .find(|w| {
                        p.compare_within(&Amount::Exact(w[1].0), 0.0)
                            != core::cmp::Ordering::Greater
                    })
                    .unwrap_or(&knots[knots.len() - 2..]);
                let (p0, u0) = seg[0];
                let (p1, u1) = seg[1];
                let slope = (u1 - u0) / (p1 - p0);
                Ok(Amount::Exact(u0) + Amount::Exact(slope) * (p - Amount::Exact(p0)))
            }
        }
    }

    /// `U(1)`.
    pub fn at_one(&self) -> Amount {
        self.value(Amount::one()).expect("1 is a valid reward")
    }
}

fn checked_pow(base: Ratio, exp: i128) -> Option<Ratio> {
    let mut acc = Ratio::one();
    for _ in 0..exp {
        acc = num_traits::CheckedMul::checked_mul(&acc, &base)?;
    }
    Some(acc)
}

fn check_reward(p: Amount) -> Result<Amount, UtilityError> {
    match p {
        Amount::Exact(r) => {
            if r < Ratio::zero() || r > Ratio::one() {
                return Err(UtilityError::RewardOutOfRange(format_ratio(&r)));
            }
            Ok(p)
        }
        Amount::Approx(v) => {
            if !(-BUDGET_TOLERANCE..=1.0 + BUDGET_TOLERANCE).contains(&v) {
                return Err(UtilityError::RewardOutOfRange(format!("{v}")));
            }
            Ok(Amount::Approx(v.clamp(0.0, 1.0)))
        }
    }
}

impl TryFrom<UtilityForm> for UtilityFunction {
    type Error = UtilityError;
    fn try_from(form: UtilityForm) -> Result<Self, Self::Error> {
        match form {
            UtilityForm::Power(a) => UtilityFunction::power(a),
            UtilityForm::PiecewiseLinear(k) => UtilityFunction::piecewise_linear(k),
        }
    }
}

impl From<UtilityFunction> for UtilityForm {
    fn from(u: UtilityFunction) -> Self {
        u.form
    }
}

impl fmt::Display for UtilityFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            UtilityForm::Power(a) => write!(f, "power:{}", format_ratio(a)),
            UtilityForm::PiecewiseLinear(knots) => {
                f.write_str("pwl:")?;
                for (i, (p, u)) in knots.iter().skip(1).enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}={}", format_ratio(p), format_ratio(u))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for UtilityFunction {
    type Err = UtilityError;

    /// `power:<alpha>` or `pwl:<p1>=<u1>,<p2>=<u2>,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || UtilityError::BadSpec(String::from(s));
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "power" => UtilityFunction::power(parse_ratio(rest).ok_or_else(bad)?),
            "pwl" => {
                let knots = rest
                    .split(',')
                    .map(|pair| {
                        let (p, u) = pair.split_once('=')?;
                        Some((parse_ratio(p)?, parse_ratio(u)?))
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(bad)?;
                UtilityFunction::piecewise_linear(knots)
            }
            _ => Err(bad()),
        }
    }
}

/// A finite-support distribution over rewards in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardLottery {
    outcomes: Vec<(Amount, Amount)>,
}

impl RewardLottery {
    pub fn new(outcomes: Vec<(Amount, Amount)>) -> Result<Self, UtilityError> {
        if outcomes.is_empty() {
            return Err(UtilityError::EmptyLottery);
        }
        let mut total = Amount::zero();
        for (reward, prob) in &outcomes {
            check_reward(*reward)?;
            if prob.to_f64() < -BUDGET_TOLERANCE {
                return Err(UtilityError::BadProbabilities(format!("{prob}")));
            }
            total = total + *prob;
        }
        if total.compare_within(&Amount::one(), BUDGET_TOLERANCE) != core::cmp::Ordering::Equal {
            return Err(UtilityError::BadProbabilities(format!("sum {total}")));
        }
        Ok(RewardLottery { outcomes })
    }

    /// `reward` for sure.
    pub fn certain(reward: Amount) -> Result<Self, UtilityError> {
        Self::new(alloc::vec![(reward, Amount::one())])
    }

    /// `reward` with probability `prob`, nothing otherwise.
    pub fn binary(reward: Amount, prob: Amount) -> Result<Self, UtilityError> {
        Self::new(alloc::vec![
            (reward, prob),
            (Amount::zero(), Amount::one() - prob)
        ])
    }

    pub fn outcomes(&self) -> &[(Amount, Amount)] {
        &self.outcomes
    }

    pub fn mean(&self) -> Amount {
        self.outcomes
            .iter()
            .fold(Amount::zero(), |acc, (r, p)| acc + *r * *p)
    }
}

/// `Σ prob · U(reward)`.
pub fn expected_utility(
    u: &UtilityFunction,
    lottery: &RewardLottery,
) -> Result<Amount, UtilityError> {
    lottery
        .outcomes()
        .iter()
        .try_fold(Amount::zero(), |acc, (reward, prob)| {
            Ok(acc + *prob * u.value(*reward)?)
        })
}

/// `U(E[p]) - E[U(p)]`: nonnegative for concave, nonpositive for convex.
pub fn jensen_gap(u: &UtilityFunction, lottery: &RewardLottery) -> Result<Amount, UtilityError> {
    Ok(u.value(lottery.mean())? - expected_utility(u, lottery)?)
}

/// What one coalition member gets from the merged miner's reward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MemberShare {
    /// A fixed fraction of whatever the coalition receives.
    Fraction(Amount),
    /// The whole coalition reward with this probability.
    Lottery(Ratio),
}

/// Lottery over a member's own reward before merging, when the rule
/// assigns it `reward`.
pub fn reward_lottery_before(
    semantics: Semantics,
    reward: Amount,
) -> Result<RewardLottery, UtilityError> {
    match semantics {
        Semantics::Randomized => RewardLottery::binary(Amount::one(), reward),
        Semantics::Deterministic => RewardLottery::certain(reward),
    }
}

/// Lottery over a member's reward after merging, when the merged miner is
/// assigned `coalition_reward`.
pub fn reward_lottery_after(
    semantics: Semantics,
    coalition_reward: Amount,
    share: MemberShare,
) -> Result<RewardLottery, UtilityError> {
    match (semantics, share) {
        (Semantics::Randomized, MemberShare::Fraction(f)) => {
            RewardLottery::binary(f, coalition_reward)
        }
        (Semantics::Randomized, MemberShare::Lottery(q)) => {
            RewardLottery::binary(Amount::one(), coalition_reward * Amount::Exact(q))
        }
        (Semantics::Deterministic, MemberShare::Fraction(f)) => {
            RewardLottery::certain(coalition_reward * f)
        }
        (Semantics::Deterministic, MemberShare::Lottery(q)) => {
            RewardLottery::binary(coalition_reward, Amount::Exact(q))
        }
    }
}

/// Closed forms of `E[U]` for [`reward_lottery_before`].
pub fn utility_before(
    u: &UtilityFunction,
    semantics: Semantics,
    reward: Amount,
) -> Result<Amount, UtilityError> {
    match semantics {
        Semantics::Randomized => Ok(u.at_one() * reward),
        Semantics::Deterministic => u.value(reward),
    }
}

/// Closed forms of `E[U]` for [`reward_lottery_after`].
pub fn utility_after(
    u: &UtilityFunction,
    semantics: Semantics,
    coalition_reward: Amount,
    share: MemberShare,
) -> Result<Amount, UtilityError> {
    match (semantics, share) {
        (Semantics::Randomized, MemberShare::Fraction(f)) => Ok(coalition_reward * u.value(f)?),
        (Semantics::Randomized, MemberShare::Lottery(q)) => {
            Ok(coalition_reward * Amount::Exact(q) * u.at_one())
        }
        (Semantics::Deterministic, MemberShare::Fraction(f)) => u.value(coalition_reward * f),
        (Semantics::Deterministic, MemberShare::Lottery(q)) => {
            Ok(Amount::Exact(q) * u.value(coalition_reward)?)
        }
    }
}

/// Before/after expected utility of one coalition member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberOutcome {
    pub miner: usize,
    /// `None` for risk-neutral comparisons of expected reward.
    pub utility: Option<UtilityFunction>,
    pub before: Amount,
    pub after: Amount,
}

impl MemberOutcome {
    pub fn gain(&self) -> Amount {
        self.after - self.before
    }
}

/// Share of member `slot` of `merge` under `scheme`.
pub fn member_share(merge: &CoalitionMerge, scheme: &SharingScheme, slot: usize) -> MemberShare {
    match scheme {
        SharingScheme::Proportional => {
            let rate = merge.base.rates()[merge.members[slot]];
            MemberShare::Fraction(Amount::ratio(rate as i128, merge.pooled_rate() as i128))
        }
        SharingScheme::FixedFractions(f) => MemberShare::Fraction(Amount::Exact(f[slot])),
        SharingScheme::Lottery(q) => MemberShare::Lottery(q[slot]),
    }
}

/// Expected utility of every coalition member before and after `merge`,
/// with `assignment[k]` the utility of the `k`-th member.
///
/// Each value is computed as `E[U]` of the member's reward lottery under the
/// rule's payout semantics.
pub fn coalition_member_utility<R: Rule + ?Sized>(
    rule: &R,
    merge: &CoalitionMerge,
    scheme: &SharingScheme,
    assignment: &[UtilityFunction],
) -> Result<Vec<MemberOutcome>, AxiomError> {
    if assignment.len() != merge.members.len() {
        return Err(AxiomError::BadDeviation(format!(
            "{} utilities for a coalition of {}",
            assignment.len(),
            merge.members.len()
        )));
    }
    scheme.validate(merge.members.len())?;
    let original = rule.evaluate(&merge.base)?;
    let coalition_reward = rule.evaluate(&merge.derived())?.get(merge.merged_index());
    let semantics = rule.semantics();
    merge
        .members
        .iter()
        .enumerate()
        .map(|(slot, &miner)| {
            let u = &assignment[slot];
            let before =
                expected_utility(u, &reward_lottery_before(semantics, original.get(miner))?)?;
            let share = member_share(merge, scheme, slot);
            let after = expected_utility(
                u,
                &reward_lottery_after(semantics, coalition_reward, share)?,
            )?;
            Ok(MemberOutcome {
                miner,
                utility: Some(u.clone()),
                before,
                after,
            })
        })
        .collect()
}

/// Power utilities for `alpha` in {0.5, 0.9, 1, 1.1, 2}.
pub fn default_test_set() -> Vec<UtilityFunction> {
    [(1, 2), (9, 10), (1, 1), (11, 10), (2, 1)]
        .iter()
        .map(|&(n, d)| UtilityFunction::power(Ratio::new(n, d)).expect("positive exponent"))
        .collect()
}
