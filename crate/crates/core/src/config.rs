use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::error::RuleError;

/// Per-miner hash rates for one block-creation epoch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Configuration {
    rates: Vec<u64>,
}

impl Configuration {
    pub fn new(rates: Vec<u64>) -> Result<Self, RuleError> {
        if rates.is_empty() {
            return Err(RuleError::EmptyConfiguration);
        }
        if let Some(pos) = rates.iter().position(|&r| r == 0) {
            return Err(RuleError::NonPositiveRate { index: pos });
        }
        rates
            .iter()
            .try_fold(0u64, |acc, &r| acc.checked_add(r))
            .ok_or(RuleError::TotalOverflow)?;
        Ok(Configuration { rates })
    }

    pub fn rates(&self) -> &[u64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total(&self) -> u64 {
        self.rates.iter().sum()
    }

    /// Miners with rate greater than one.
    pub fn heavy_count(&self) -> usize {
        self.rates.iter().filter(|&&r| r > 1).count()
    }

    /// Multiplies every rate by `k`.
    pub fn scaled(&self, k: u64) -> Result<Self, RuleError> {
        let rates = self
            .rates
            .iter()
            .map(|&r| r.checked_mul(k).ok_or(RuleError::TotalOverflow))
            .collect::<Result<Vec<_>, _>>()?;
        Configuration::new(rates)
    }

    /// `(π h)_k = h_{π(k)}`.
    pub fn permuted(&self, permutation: &[usize]) -> Self {
        Configuration {
            rates: permutation.iter().map(|&i| self.rates[i]).collect(),
        }
    }

    /// Nonincreasing rearrangement, the canonical representative under symmetry.
    pub fn sorted_desc(&self) -> Self {
        let mut rates = self.rates.clone();
        rates.sort_unstable_by(|a, b| b.cmp(a));
        Configuration { rates }
    }

    pub fn is_sorted_desc(&self) -> bool {
        self.rates.windows(2).all(|w| w[0] >= w[1])
    }
}

impl TryFrom<Vec<u64>> for Configuration {
    type Error = RuleError;
    fn try_from(rates: Vec<u64>) -> Result<Self, Self::Error> {
        Configuration::new(rates)
    }
}

impl From<Configuration> for Vec<u64> {
    fn from(c: Configuration) -> Self {
        c.rates
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.rates.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

/// Expected reward per miner, aligned with a [`Configuration`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    rewards: Vec<Amount>,
}

impl Allocation {
    pub fn new(rewards: Vec<Amount>) -> Self {
        Allocation { rewards }
    }

    pub fn zeros(n: usize) -> Self {
        Allocation {
            rewards: alloc::vec![Amount::zero(); n],
        }
    }

    pub fn rewards(&self) -> &[Amount] {
        &self.rewards
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn get(&self, i: usize) -> Amount {
        self.rewards[i]
    }

    pub fn total(&self) -> Amount {
        Amount::sum(&self.rewards)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.rewards.iter().map(Amount::to_f64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rewards.iter().all(Amount::is_zero)
    }

    pub fn into_rewards(self) -> Vec<Amount> {
        self.rewards
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.rewards.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}
