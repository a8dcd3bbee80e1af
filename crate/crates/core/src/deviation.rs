//! Sybil splits, coalition merges and coalition reward-sharing schemes.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::amount::{format_ratio, Ratio};
use crate::config::Configuration;
use crate::error::AxiomError;
use crate::partitions::replacement_multisets;

/// Miner `miner` of `base` replaced by identities with rates `replacement`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SybilSplit {
    pub base: Configuration,
    pub miner: usize,
    pub replacement: Vec<u64>,
}

impl SybilSplit {
    pub fn new(
        base: Configuration,
        miner: usize,
        replacement: Vec<u64>,
    ) -> Result<Self, AxiomError> {
        if miner >= base.len() {
            return Err(AxiomError::BadDeviation(format!(
                "miner {miner} out of range for {base}"
            )));
        }
        if replacement.is_empty() || replacement.contains(&0) {
            return Err(AxiomError::BadDeviation(
                "sybil replacement needs at least one positive rate".into(),
            ));
        }
        let total: u64 = replacement.iter().sum();
        if total > base.rates()[miner] {
            return Err(AxiomError::BadDeviation(format!(
                "sybils total {total} exceeds the original rate {}",
                base.rates()[miner]
            )));
        }
        Ok(SybilSplit {
            base,
            miner,
            replacement,
        })
    }

    /// Base with the split miner removed and the sybils appended.
    pub fn derived(&self) -> Configuration {
        let mut rates: Vec<u64> = self
            .base
            .rates()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.miner)
            .map(|(_, &r)| r)
            .collect();
        let first_sybil = rates.len();
        rates.extend_from_slice(&self.replacement);
        debug_assert!(first_sybil + self.replacement.len() == rates.len());
        Configuration::new(rates).expect("split preserves positivity")
    }

    /// Indices of the sybils inside [`Self::derived`].
    pub fn sybil_indices(&self) -> core::ops::Range<usize> {
        let start = self.base.len() - 1;
        start..start + self.replacement.len()
    }
}

impl fmt::Display for SybilSplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: miner {} -> {{", self.base, self.miner)?;
        for (i, r) in self.replacement.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "}} = {}", self.derived())
    }
}

/// Every split of `h`'s miner `miner`: one per multiset of positive rates
/// with total at most `h_miner`, larger totals first.
pub fn enumerate_sybil_splits(
    h: &Configuration,
    miner: usize,
) -> impl Iterator<Item = SybilSplit> + '_ {
    let rate = h.rates().get(miner).copied().unwrap_or(0);
    replacement_multisets(rate).map(move |replacement| SybilSplit {
        base: h.clone(),
        miner,
        replacement,
    })
}

/// Coalition `members` of `base` replaced by one miner with `merged_rate`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionMerge {
    pub base: Configuration,
    pub members: Vec<usize>,
    pub merged_rate: u64,
}

impl CoalitionMerge {
    pub fn new(
        base: Configuration,
        mut members: Vec<usize>,
        merged_rate: u64,
    ) -> Result<Self, AxiomError> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() || members.iter().any(|&m| m >= base.len()) {
            return Err(AxiomError::BadDeviation(format!(
                "coalition {members:?} is not a nonempty subset of the miners of {base}"
            )));
        }
        let pooled: u64 = members.iter().map(|&m| base.rates()[m]).sum();
        if merged_rate == 0 || merged_rate > pooled {
            return Err(AxiomError::BadDeviation(format!(
                "merged rate {merged_rate} must lie in 1..={pooled}"
            )));
        }
        Ok(CoalitionMerge {
            base,
            members,
            merged_rate,
        })
    }

    pub fn pooled_rate(&self) -> u64 {
        self.members.iter().map(|&m| self.base.rates()[m]).sum()
    }

    /// Base with the members removed and the merged miner appended last.
    pub fn derived(&self) -> Configuration {
        let mut rates: Vec<u64> = self
            .base
            .rates()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.members.contains(i))
            .map(|(_, &r)| r)
            .collect();
        rates.push(self.merged_rate);
        Configuration::new(rates).expect("merge preserves positivity")
    }

    /// Index of the merged miner inside [`Self::derived`].
    pub fn merged_index(&self) -> usize {
        self.base.len() - self.members.len()
    }
}

impl fmt::Display for CoalitionMerge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: miners {:?} -> {} = {}",
            self.base,
            self.members,
            self.merged_rate,
            self.derived()
        )
    }
}

/// Combinations of `0..n` of size `k` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every coalition merge of `h` with coalition size in `sizes`.
///
/// Coalitions go by size, then lexicographically; for each coalition the
/// merged rate runs from the pooled rate down to 1.
pub fn enumerate_merges(
    h: &Configuration,
    sizes: core::ops::RangeInclusive<usize>,
) -> Vec<CoalitionMerge> {
    let mut out = Vec::new();
    let n = h.len();
    for k in sizes {
        if k == 0 || k > n {
            continue;
        }
        for members in combinations(n, k) {
            let pooled: u64 = members.iter().map(|&m| h.rates()[m]).sum();
            for merged_rate in (1..=pooled).rev() {
                out.push(CoalitionMerge {
                    base: h.clone(),
                    members: members.clone(),
                    merged_rate,
                });
            }
        }
    }
    out
}

/// How a coalition splits the reward its merged miner earns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingScheme {
    /// Member `i` takes `h_i / Σ_T h_j` of every reward.
    Proportional,
    /// Member `i` takes the fixed fraction `f_i` of every reward.
    FixedFractions(Vec<Ratio>),
    /// The whole coalition reward goes to member `i` with probability `q_i`.
    Lottery(Vec<Ratio>),
}

impl SharingScheme {
    pub fn validate(&self, members: usize) -> Result<(), AxiomError> {
        let parts = match self {
            SharingScheme::Proportional => return Ok(()),
            SharingScheme::FixedFractions(f) | SharingScheme::Lottery(f) => f,
        };
        if parts.len() != members {
            return Err(AxiomError::BadDeviation(format!(
                "sharing scheme has {} parts for {members} members",
                parts.len()
            )));
        }
        if parts.iter().any(|p| *p < Ratio::zero()) {
            return Err(AxiomError::BadDeviation(
                "sharing fractions must be nonnegative".into(),
            ));
        }
        let total: Ratio = parts.iter().sum();
        if total > Ratio::one() {
            return Err(AxiomError::BadDeviation(format!(
                "sharing fractions sum to {} > 1",
                format_ratio(&total)
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SharingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, parts: &[Ratio]| {
            write!(f, "{name}(")?;
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str(&format_ratio(p))?;
            }
            f.write_str(")")
        };
        match self {
            SharingScheme::Proportional => f.write_str("proportional"),
            SharingScheme::FixedFractions(p) => list(f, "fixed", p),
            SharingScheme::Lottery(p) => list(f, "lottery", p),
        }
    }
}

/// The declared family of sharing schemes searched by arbitrary-sharing
/// collusion checks under non-linear utilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SharingFamily {
    /// Fractions and lottery probabilities are multiples of `1 / grid`.
    pub grid: u32,
    pub proportional: bool,
    pub fixed_fractions: bool,
    pub lotteries: bool,
}

impl Default for SharingFamily {
    fn default() -> Self {
        SharingFamily {
            grid: 16,
            proportional: true,
            fixed_fractions: true,
            lotteries: true,
        }
    }
}

impl fmt::Display for SharingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<alloc::string::String> = Vec::new();
        if self.proportional {
            parts.push("proportional".into());
        }
        if self.fixed_fractions {
            parts.push(format!("fixed fractions on 1/{}", self.grid));
        }
        if self.lotteries {
            parts.push(format!("single-winner lotteries on 1/{}", self.grid));
        }
        f.write_str(&parts.join(" + "))
    }
}

impl SharingFamily {
    /// Calls `visit` on every scheme for a coalition of `members`, in a
    /// fixed order, until it returns `true`.
    pub fn for_each_scheme(&self, members: usize, mut visit: impl FnMut(&SharingScheme) -> bool) {
        if self.proportional && visit(&SharingScheme::Proportional) {
            return;
        }
        let grid = self.grid.max(1) as i128;
        let to_ratios = |v: &[i128]| v.iter().map(|&k| Ratio::new(k, grid)).collect::<Vec<_>>();
        if self.fixed_fractions
            && for_each_grid_vector(members, grid, &mut |v| {
                visit(&SharingScheme::FixedFractions(to_ratios(v)))
            })
        {
            return;
        }
        if self.lotteries {
            for_each_grid_vector(members, grid, &mut |v| {
                visit(&SharingScheme::Lottery(to_ratios(v)))
            });
        }
    }
}

/// Visits nonnegative integer vectors of length `len` with sum at most
/// `cap` in lexicographic order; returns `true` once `visit` does.
fn for_each_grid_vector(len: usize, cap: i128, visit: &mut dyn FnMut(&[i128]) -> bool) -> bool {
    fn rec(
        len: usize,
        cap: i128,
        prefix: &mut Vec<i128>,
        visit: &mut dyn FnMut(&[i128]) -> bool,
    ) -> bool {
        if prefix.len() == len {
            return visit(prefix);
        }
        for k in 0..=cap {
            prefix.push(k);
            let stop = rec(len, cap - k, prefix, visit);
            prefix.pop();
            if stop {
                return true;
            }
        }
        false
    }
    rec(len, cap, &mut Vec::with_capacity(len), visit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg(r: &[u64]) -> Configuration {
        Configuration::new(r.to_vec()).unwrap()
    }

    #[test]
    fn split_derivation_appends_sybils() {
        let s = SybilSplit::new(cfg(&[4, 1]), 0, vec![1, 1, 1, 1]).unwrap();
        assert_eq!(s.derived().rates(), &[1, 1, 1, 1, 1]);
        assert_eq!(s.sybil_indices(), 1..5);
        assert!(SybilSplit::new(cfg(&[2, 1]), 0, vec![2, 1]).is_err());
        assert!(SybilSplit::new(cfg(&[2, 1]), 2, vec![1]).is_err());
    }

    #[test]
    fn merge_derivation_appends_merged_miner() {
        let m = CoalitionMerge::new(cfg(&[3, 1, 2]), vec![2, 0], 4).unwrap();
        assert_eq!(m.members, vec![0, 2]);
        assert_eq!(m.derived().rates(), &[1, 4]);
        assert_eq!(m.merged_index(), 1);
        assert!(CoalitionMerge::new(cfg(&[3, 1]), vec![0, 1], 5).is_err());
        assert!(CoalitionMerge::new(cfg(&[3, 1]), vec![], 1).is_err());
    }

    #[test]
    fn merge_count_per_coalition_is_pooled_rate() {
        let h = cfg(&[2, 3, 1]);
        let merges = enumerate_merges(&h, 1..=3);
        for members in [vec![0], vec![1, 2], vec![0, 1, 2]] {
            let pooled: u64 = members.iter().map(|&m| h.rates()[m]).sum();
            let count = merges.iter().filter(|m| m.members == members).count() as u64;
            assert_eq!(count, pooled);
        }
        assert_eq!(merges.len() as u64, 2 + 3 + 1 + 5 + 3 + 4 + 6);
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn family_size_matches_stars_and_bars() {
        // Vectors of length k with sum <= 16: C(16 + k, k).
        let family = SharingFamily::default();
        let mut count = 0;
        family.for_each_scheme(2, |_| {
            count += 1;
            false
        });
        assert_eq!(count, 1 + 2 * 153);
    }

    #[test]
    fn scheme_validation() {
        let over = SharingScheme::FixedFractions(vec![Ratio::new(3, 4), Ratio::new(1, 2)]);
        assert!(over.validate(2).is_err());
        assert!(over.validate(3).is_err());
        assert!(
            SharingScheme::Lottery(vec![Ratio::new(1, 2), Ratio::new(1, 2)])
                .validate(2)
                .is_ok()
        );
    }
}
