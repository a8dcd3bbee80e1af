use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::AxiomError;

/// Finite restriction of the configuration space: every tuple of positive
/// integers with at most `max_miners` entries and total at most `max_total`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Universe {
    pub max_miners: usize,
    pub max_total: u64,
}

impl Universe {
    pub fn new(max_miners: usize, max_total: u64) -> Result<Self, AxiomError> {
        if max_miners == 0 || max_total == 0 {
            return Err(AxiomError::BadUniverse(format!(
                "bounds must be positive (got {max_miners}x{max_total})"
            )));
        }
        if max_total > 64 {
            return Err(AxiomError::BadUniverse(format!(
                "total bound {max_total} is too large to enumerate"
            )));
        }
        Ok(Universe {
            max_miners,
            max_total,
        })
    }

    pub fn contains(&self, h: &Configuration) -> bool {
        h.len() <= self.max_miners && h.total() <= self.max_total
    }

    /// Every configuration, ordered by length and then lexicographically.
    pub fn configurations(&self) -> Vec<Configuration> {
        let mut out = Vec::new();
        let longest = self.max_miners.min(self.max_total as usize);
        for n in 1..=longest {
            let mut prefix = Vec::with_capacity(n);
            push_tuples(n, self.max_total, &mut prefix, &mut out, false);
        }
        out
    }

    /// Nonincreasing configurations, one per permutation class.
    pub fn sorted_representatives(&self) -> Vec<Configuration> {
        let mut out = Vec::new();
        let longest = self.max_miners.min(self.max_total as usize);
        for n in 1..=longest {
            let mut prefix = Vec::with_capacity(n);
            push_tuples(n, self.max_total, &mut prefix, &mut out, true);
        }
        out
    }
}

fn push_tuples(
    len: usize,
    budget: u64,
    prefix: &mut Vec<u64>,
    out: &mut Vec<Configuration>,
    sorted: bool,
) {
    if prefix.len() == len {
        out.push(Configuration::new(prefix.clone()).expect("enumerated rates are positive"));
        return;
    }
    let remaining_slots = (len - prefix.len() - 1) as u64;
    if budget < remaining_slots + 1 {
        return;
    }
    let mut hi = budget - remaining_slots;
    if sorted {
        if let Some(&last) = prefix.last() {
            hi = hi.min(last);
        }
    }
    let values: Vec<u64> = if sorted {
        (1..=hi).rev().collect()
    } else {
        (1..=hi).collect()
    };
    for v in values {
        prefix.push(v);
        push_tuples(len, budget - v, prefix, out, sorted);
        prefix.pop();
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.max_miners, self.max_total)
    }
}

/// Parses `NxM`.
impl core::str::FromStr for Universe {
    type Err = AxiomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AxiomError::BadUniverse(format!("expected NxM, got `{s}`"));
        let (n, m) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        Universe::new(
            n.trim().parse().map_err(|_| bad())?,
            m.trim().parse().map_err(|_| bad())?,
        )
    }
}
