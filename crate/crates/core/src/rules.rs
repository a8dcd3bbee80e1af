//! Allocation rules: maps from hash-rate configurations to expected rewards.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amount::{format_ratio, Amount, Ratio, BUDGET_TOLERANCE};
use crate::config::{Allocation, Configuration};
use crate::error::RuleError;

/// How an allocation is paid out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// The whole block reward goes to one miner, drawn with probability `x_i(h)`.
    #[default]
    Randomized,
    /// Miner `i` is paid `x_i(h)` outright.
    Deterministic,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semantics::Randomized => f.write_str("randomized"),
            Semantics::Deterministic => f.write_str("deterministic"),
        }
    }
}

/// Anything that maps configurations to allocations.
///
/// The axiom engine and the rule-space search are generic over this trait so
/// that partially filled tables and ad-hoc test rules go through the same
/// checks as the catalog.
pub trait Rule {
    fn label(&self) -> String;

    fn semantics(&self) -> Semantics {
        Semantics::Randomized
    }

    fn evaluate(&self, h: &Configuration) -> Result<Allocation, RuleError>;
}

impl<R: Rule + ?Sized> Rule for &R {
    fn label(&self) -> String {
        (**self).label()
    }
    fn semantics(&self) -> Semantics {
        (**self).semantics()
    }
    fn evaluate(&self, h: &Configuration) -> Result<Allocation, RuleError> {
        (**self).evaluate(h)
    }
}

/// The multiplier `c(m)` of a generalized proportional rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingFunction {
    Constant(Ratio),
    /// `low` below `threshold`, `high` from `threshold` on.
    Step {
        threshold: u64,
        low: Ratio,
        high: Ratio,
    },
    /// `min(1, m / saturation)`.
    Ramp {
        saturation: u64,
    },
    /// Explicit values; undefined off the table.
    Table(BTreeMap<u64, Ratio>),
}

fn in_unit(v: &Ratio) -> bool {
    *v >= Ratio::zero() && *v <= Ratio::one()
}

impl ScalingFunction {
    pub fn constant(v: Ratio) -> Result<Self, RuleError> {
        let c = ScalingFunction::Constant(v);
        c.validate()?;
        Ok(c)
    }

    pub fn step(threshold: u64, low: Ratio, high: Ratio) -> Result<Self, RuleError> {
        let c = ScalingFunction::Step {
            threshold,
            low,
            high,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn ramp(saturation: u64) -> Result<Self, RuleError> {
        let c = ScalingFunction::Ramp { saturation };
        c.validate()?;
        Ok(c)
    }

    pub fn table(values: BTreeMap<u64, Ratio>) -> Result<Self, RuleError> {
        let c = ScalingFunction::Table(values);
        c.validate()?;
        Ok(c)
    }

    /// Values in `[0, 1]` and nondecreasing in the total.
    pub fn validate(&self) -> Result<(), RuleError> {
        let bad = |msg: String| Err(RuleError::InvalidScaling(msg));
        match self {
            ScalingFunction::Constant(v) => {
                if !in_unit(v) {
                    return bad(format!("constant {} outside [0,1]", format_ratio(v)));
                }
            }
            ScalingFunction::Step {
                threshold,
                low,
                high,
            } => {
                if *threshold == 0 {
                    return bad("step threshold must be positive".into());
                }
                if !in_unit(low) || !in_unit(high) {
                    return bad("step values must lie in [0,1]".into());
                }
                if low > high {
                    return bad("step must be nondecreasing (low <= high)".into());
                }
            }
            ScalingFunction::Ramp { saturation } => {
                if *saturation == 0 {
                    return bad("ramp saturation must be positive".into());
                }
            }
            ScalingFunction::Table(values) => {
                if values.is_empty() {
                    return bad("table must define at least one total".into());
                }
                if values.contains_key(&0) {
                    return bad("table totals must be positive".into());
                }
                let mut prev: Option<&Ratio> = None;
                for (m, v) in values {
                    if !in_unit(v) {
                        return bad(format!("c({m}) = {} outside [0,1]", format_ratio(v)));
                    }
                    if let Some(p) = prev {
                        if v < p {
                            return bad(format!("table decreases at total {m}"));
                        }
                    }
                    prev = Some(v);
                }
            }
        }
        Ok(())
    }

    pub fn value_at(&self, total: u64) -> Option<Ratio> {
        match self {
            ScalingFunction::Constant(v) => Some(*v),
            ScalingFunction::Step {
                threshold,
                low,
                high,
            } => Some(if total < *threshold { *low } else { *high }),
            ScalingFunction::Ramp { saturation } => {
                if total >= *saturation {
                    Some(Ratio::one())
                } else {
                    Some(Ratio::new(total as i128, *saturation as i128))
                }
            }
            ScalingFunction::Table(values) => values.get(&total).copied(),
        }
    }
}

impl fmt::Display for ScalingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingFunction::Constant(v) => write!(f, "const:{}", format_ratio(v)),
            ScalingFunction::Step {
                threshold,
                low,
                high,
            } => {
                write!(
                    f,
                    "step:{threshold}:{}:{}",
                    format_ratio(low),
                    format_ratio(high)
                )
            }
            ScalingFunction::Ramp { saturation } => write!(f, "ramp:{saturation}"),
            ScalingFunction::Table(values) => {
                f.write_str("table:")?;
                for (i, (m, v)) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{m}={}", format_ratio(v))?;
                }
                Ok(())
            }
        }
    }
}

/// A symmetric rule given by explicit values on sorted representatives.
///
/// Keys are nonincreasing configurations; the value vector is aligned with the
/// key, so equal rates must carry equal rewards.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRule {
    entries: BTreeMap<Vec<u64>, Vec<Ratio>>,
}

impl TableRule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &Configuration, values: Vec<Ratio>) -> Result<(), RuleError> {
        let describe = || format!("{key}");
        if !key.is_sorted_desc() {
            return Err(RuleError::InvalidTableEntry {
                config: describe(),
                reason: "key must be sorted in nonincreasing order".into(),
            });
        }
        if values.len() != key.len() {
            return Err(RuleError::InvalidTableEntry {
                config: describe(),
                reason: "allocation length differs from configuration length".into(),
            });
        }
        if values.iter().any(|v| *v < Ratio::zero()) {
            return Err(RuleError::InvalidTableEntry {
                config: describe(),
                reason: "rewards must be nonnegative".into(),
            });
        }
        for (w, v) in key.rates().windows(2).zip(values.windows(2)) {
            if w[0] == w[1] && v[0] != v[1] {
                return Err(RuleError::InvalidTableEntry {
                    config: describe(),
                    reason: "equal rates must receive equal rewards".into(),
                });
            }
        }
        self.entries.insert(key.rates().to_vec(), values);
        Ok(())
    }

    pub fn remove(&mut self, key: &Configuration) {
        self.entries.remove(key.rates());
    }

    pub fn get(&self, key: &[u64]) -> Option<&[Ratio]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u64], &[Ratio])> {
        self.entries
            .iter()
            .map(|(k, v)| (k.as_slice(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn evaluate(&self, h: &Configuration) -> Result<Allocation, RuleError> {
        let mut order: Vec<usize> = (0..h.len()).collect();
        order.sort_by(|&a, &b| h.rates()[b].cmp(&h.rates()[a]));
        let key: Vec<u64> = order.iter().map(|&i| h.rates()[i]).collect();
        let values = self
            .entries
            .get(&key)
            .ok_or_else(|| RuleError::MissingTableEntry(format!("{h}")))?;
        let mut rewards = alloc::vec![Amount::zero(); h.len()];
        for (slot, &miner) in order.iter().enumerate() {
            rewards[miner] = Amount::Exact(values[slot]);
        }
        Ok(Allocation::new(rewards))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Proportional,
    AllZero,
    GeneralizedProportional(ScalingFunction),
    ProportionalToSquares,
    ProportionalToSquareRoots,
    HalfThreshold,
    Tabulated(TableRule),
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::Proportional => f.write_str("proportional"),
            RuleKind::AllZero => f.write_str("allzero"),
            RuleKind::GeneralizedProportional(c) => write!(f, "genprop:{c}"),
            RuleKind::ProportionalToSquares => f.write_str("squares"),
            RuleKind::ProportionalToSquareRoots => f.write_str("sqrts"),
            RuleKind::HalfThreshold => f.write_str("halfthreshold"),
            RuleKind::Tabulated(t) => write!(f, "table[{} entries]", t.len()),
        }
    }
}

/// A named allocation rule together with its payout semantics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationRule {
    pub kind: RuleKind,
    pub semantics: Semantics,
}

impl AllocationRule {
    pub fn new(kind: RuleKind) -> Self {
        AllocationRule {
            kind,
            semantics: Semantics::Randomized,
        }
    }

    pub fn proportional() -> Self {
        Self::new(RuleKind::Proportional)
    }

    pub fn all_zero() -> Self {
        Self::new(RuleKind::AllZero)
    }

    pub fn generalized(c: ScalingFunction) -> Self {
        Self::new(RuleKind::GeneralizedProportional(c))
    }

    pub fn squares() -> Self {
        Self::new(RuleKind::ProportionalToSquares)
    }

    pub fn square_roots() -> Self {
        Self::new(RuleKind::ProportionalToSquareRoots)
    }

    pub fn half_threshold() -> Self {
        Self::new(RuleKind::HalfThreshold)
    }

    pub fn tabulated(table: TableRule) -> Self {
        Self::new(RuleKind::Tabulated(table))
    }

    pub fn with_semantics(mut self, semantics: Semantics) -> Self {
        self.semantics = semantics;
        self
    }

    /// Evaluates the rule at the rational configuration `h / scale`.
    ///
    /// Every rule except the scaling-dependent ones is invariant under a common
    /// rescaling; generalized proportional rules read `c` at `total / scale`,
    /// which must be an integer, and tables require `scale == 1`.
    pub fn evaluate_scaled(&self, h: &Configuration, scale: u64) -> Result<Allocation, RuleError> {
        let n = h.len();
        let total = h.total() as i128;
        let proportional = || {
            h.rates()
                .iter()
                .map(|&r| Amount::Exact(Ratio::new(r as i128, total)))
                .collect::<Vec<_>>()
        };
        let rewards = match &self.kind {
            RuleKind::Proportional => proportional(),
            RuleKind::AllZero => alloc::vec![Amount::zero(); n],
            RuleKind::GeneralizedProportional(c) => {
                if scale == 0 || !h.total().is_multiple_of(scale) {
                    return Err(RuleError::UndefinedScaling {
                        total: format!("{}/{}", h.total(), scale),
                    });
                }
                let m = h.total() / scale;
                let cm = c.value_at(m).ok_or_else(|| RuleError::UndefinedScaling {
                    total: m.to_string(),
                })?;
                h.rates()
                    .iter()
                    .map(|&r| Amount::Exact(cm * Ratio::new(r as i128, total)))
                    .collect()
            }
            RuleKind::ProportionalToSquares => {
                let squares: Vec<i128> = h
                    .rates()
                    .iter()
                    .map(|&r| (r as i128) * (r as i128))
                    .collect();
                let denom: i128 = squares.iter().sum();
                squares
                    .iter()
                    .map(|&s| Amount::Exact(Ratio::new(s, denom)))
                    .collect()
            }
            RuleKind::ProportionalToSquareRoots => {
                let roots: Vec<f64> = h.rates().iter().map(|&r| libm::sqrt(r as f64)).collect();
                let denom: f64 = roots.iter().sum();
                roots.iter().map(|&s| Amount::Approx(s / denom)).collect()
            }
            RuleKind::HalfThreshold => {
                // Strictly more than half; a miner at exactly half is proportional.
                match h.rates().iter().position(|&r| 2 * (r as i128) > total) {
                    Some(major) => (0..n)
                        .map(|i| {
                            if i == major {
                                Amount::Exact(Ratio::new(h.rates()[i] as i128, total))
                            } else {
                                Amount::zero()
                            }
                        })
                        .collect(),
                    None => proportional(),
                }
            }
            RuleKind::Tabulated(table) => {
                if scale != 1 {
                    return Err(RuleError::UndefinedScaling {
                        total: format!("{}/{}", h.total(), scale),
                    });
                }
                return table.evaluate(h);
            }
        };
        Ok(Allocation::new(rewards))
    }
}

impl Rule for AllocationRule {
    fn label(&self) -> String {
        match self.semantics {
            Semantics::Randomized => self.kind.to_string(),
            Semantics::Deterministic => format!("{}[deterministic]", self.kind),
        }
    }

    fn semantics(&self) -> Semantics {
        self.semantics
    }

    fn evaluate(&self, h: &Configuration) -> Result<Allocation, RuleError> {
        self.evaluate_scaled(h, 1)
    }
}

impl Rule for TableRule {
    fn label(&self) -> String {
        format!("table[{} entries]", self.len())
    }

    fn evaluate(&self, h: &Configuration) -> Result<Allocation, RuleError> {
        TableRule::evaluate(self, h)
    }
}

/// Realizes one payout of `allocation` under `semantics`.
///
/// Randomized payouts give the whole reward to at most one miner; nobody is
/// paid with the leftover probability `1 - Σ x_i`.
pub fn realize<G: RngCore + ?Sized>(
    allocation: &Allocation,
    semantics: Semantics,
    rng: &mut G,
) -> Result<Allocation, RuleError> {
    let total = allocation.total();
    if total.compare_within(&Amount::one(), BUDGET_TOLERANCE) == core::cmp::Ordering::Greater {
        return Err(RuleError::InvalidLottery {
            total: format!("{total}"),
        });
    }
    match semantics {
        Semantics::Deterministic => Ok(allocation.clone()),
        Semantics::Randomized => {
            let u: f64 = rng.gen();
            let mut rewards = alloc::vec![Amount::zero(); allocation.len()];
            let mut cumulative = 0.0;
            for (i, p) in allocation.rewards().iter().enumerate() {
                cumulative += p.to_f64();
                if u < cumulative {
                    rewards[i] = Amount::one();
                    break;
                }
            }
            Ok(Allocation::new(rewards))
        }
    }
}

/// One seeded payout of `rule` at `h`.
pub fn draw_reward<R: Rule + ?Sized>(
    rule: &R,
    h: &Configuration,
    seed: u64,
) -> Result<Allocation, RuleError> {
    let allocation = rule.evaluate(h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    realize(&allocation, rule.semantics(), &mut rng)
}
