//! Integer partitions, used to enumerate sybil replacements.

use alloc::vec;
use alloc::vec::Vec;

/// Partitions of `n` into positive parts, largest parts first, in reverse
/// lexicographic order: `[3]`, `[2, 1]`, `[1, 1, 1]`.
#[derive(Clone, Debug)]
pub struct Partitions {
    current: Option<Vec<u64>>,
}

impl Partitions {
    pub fn new(n: u64) -> Self {
        Partitions {
            current: if n == 0 { None } else { Some(vec![n]) },
        }
    }
}

impl Iterator for Partitions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        if let Some(j) = next.iter().rposition(|&p| p > 1) {
            let mut rem = (next.len() - j - 1) as u64 + 1;
            let v = next[j] - 1;
            next.truncate(j);
            next.push(v);
            while rem > v {
                next.push(v);
                rem -= v;
            }
            if rem > 0 {
                next.push(rem);
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// All multisets of positive rates with total at most `rate`: partitions of
/// `rate`, then of `rate - 1`, down to `1`.
pub fn replacement_multisets(rate: u64) -> impl Iterator<Item = Vec<u64>> {
    (1..=rate).rev().flat_map(Partitions::new)
}
