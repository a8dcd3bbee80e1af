//! Partial/full-solution protocol under a memoryless event model.
//!
//! Every solution event belongs to miner `i` with probability `h_i / Σh` and
//! is a full solution with probability `1/M`. An epoch ends at the first full
//! solution, which also counts toward its finder's partial count. Epoch `e`
//! draws its events from stream `2e` and its reward lottery from stream
//! `2e + 1` of a ChaCha8 generator keyed by the master seed, so runs under
//! different rules or semantics see the same events.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amount::{Amount, Ratio};
use crate::config::Configuration;
use crate::error::{RuleError, SimError};
use crate::rules::{realize, AllocationRule, Semantics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Partial solutions per full solution, a power of two.
    pub m: u64,
    /// Hash rate expected to produce one partial solution per block interval.
    pub rho: u64,
    pub seed: u64,
}

impl ProtocolParams {
    pub fn new(m: u64, rho: u64, seed: u64) -> Result<Self, SimError> {
        if m == 0 || !m.is_power_of_two() {
            return Err(SimError::BadRatio(m));
        }
        if rho == 0 {
            return Err(SimError::BadRho);
        }
        Ok(ProtocolParams { m, rho, seed })
    }

    /// `ρ·M`, the estimated total hash rate in every epoch.
    pub fn estimated_total(&self) -> u64 {
        self.rho * self.m
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochOutcome {
    pub epoch: u64,
    pub partial_counts: Vec<u64>,
    pub leader: usize,
    pub m_prime: u64,
    /// `ĥ_i = g_i·ρ·M / M′`.
    pub estimates: Vec<Ratio>,
    pub rewards: Vec<Amount>,
}

impl EpochOutcome {
    /// `g_i / M′`.
    pub fn share_estimate(&self, miner: usize) -> f64 {
        self.partial_counts[miner] as f64 / self.m_prime as f64
    }

    pub fn estimate_total(&self) -> Ratio {
        self.estimates.iter().sum()
    }

    pub fn reward_total(&self) -> Amount {
        Amount::sum(&self.rewards)
    }
}

fn pick(cumulative: &[u64], draw: u64) -> usize {
    cumulative.partition_point(|&c| c <= draw)
}

/// Event counts for one epoch: `(g, leader, M′)`.
fn sample_events(h: &Configuration, params: &ProtocolParams, epoch: u64) -> (Vec<u64>, usize, u64) {
    let mut rng = params.rng(2 * epoch);
    let cumulative: Vec<u64> = h
        .rates()
        .iter()
        .scan(0u64, |acc, &r| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    let total = h.total();
    let mut counts = vec![0u64; h.len()];
    let mut events = 0u64;
    loop {
        let miner = pick(&cumulative, rng.gen_range(0..total));
        counts[miner] += 1;
        events += 1;
        if params.m == 1 || rng.gen_range(0..params.m) == 0 {
            return (counts, miner, events);
        }
    }
}

/// Rewards for an epoch given its partial counts: `rule` applied to `ĥ`,
/// dropping miners with no partial solutions.
fn epoch_rewards(
    rule: &AllocationRule,
    counts: &[u64],
    m_prime: u64,
    params: &ProtocolParams,
    epoch: u64,
) -> Result<Vec<Amount>, RuleError> {
    let active: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
    let scaled = Configuration::new(
        active
            .iter()
            .map(|&i| {
                counts[i]
                    .checked_mul(params.estimated_total())
                    .ok_or(RuleError::TotalOverflow)
            })
            .collect::<Result<_, _>>()?,
    )?;
    let allocation = rule.evaluate_scaled(&scaled, m_prime)?;
    let mut rng = params.rng(2 * epoch + 1);
    let realized = realize(&allocation, rule.semantics, &mut rng)?;
    let mut rewards = vec![Amount::zero(); counts.len()];
    for (slot, &i) in active.iter().enumerate() {
        rewards[i] = realized.get(slot);
    }
    Ok(rewards)
}

/// One epoch of the protocol; a pure function of its arguments.
pub fn run_epoch(
    h: &Configuration,
    params: &ProtocolParams,
    rule: &AllocationRule,
    epoch: u64,
) -> Result<EpochOutcome, SimError> {
    let (counts, leader, m_prime) = sample_events(h, params, epoch);
    let estimates = counts
        .iter()
        .map(|&g| Ratio::new((g * params.estimated_total()) as i128, m_prime as i128))
        .collect();
    let rewards = epoch_rewards(rule, &counts, m_prime, params, epoch)?;
    Ok(EpochOutcome {
        epoch,
        partial_counts: counts,
        leader,
        m_prime,
        estimates,
        rewards,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub epochs: u64,
    pub mean_reward: Vec<f64>,
    /// Per-epoch reward variance (population form).
    pub reward_variance: Vec<f64>,
    /// RMSE of `g_i / M′` against `h_i / Σh`.
    pub share_rmse: Vec<f64>,
    pub leader_frequency: Vec<f64>,
    pub mean_m_prime: f64,
    pub total_partials: Vec<u64>,
    /// Epochs in which `Σ ĥ_i ≠ ρ·M`; zero unless the estimator is broken.
    pub identity_violations: u64,
}

impl SimulationStats {
    /// Aggregates outcomes in the order given.
    pub fn from_outcomes(
        h: &Configuration,
        params: &ProtocolParams,
        outcomes: &[EpochOutcome],
    ) -> Result<Self, SimError> {
        if outcomes.is_empty() {
            return Err(SimError::NoEpochs);
        }
        let n = h.len();
        let e = outcomes.len() as f64;
        let total = h.total() as f64;
        let target = Ratio::from_integer(params.estimated_total() as i128);
        let mut sum = vec![0.0; n];
        let mut sum_sq = vec![0.0; n];
        let mut err_sq = vec![0.0; n];
        let mut leaders = vec![0u64; n];
        let mut partials = vec![0u64; n];
        let mut m_prime = 0.0;
        let mut identity_violations = 0;
        for o in outcomes {
            for i in 0..n {
                let r = o.rewards[i].to_f64();
                sum[i] += r;
                sum_sq[i] += r * r;
                let d = o.share_estimate(i) - h.rates()[i] as f64 / total;
                err_sq[i] += d * d;
                partials[i] += o.partial_counts[i];
            }
            leaders[o.leader] += 1;
            m_prime += o.m_prime as f64;
            if o.estimate_total() != target {
                identity_violations += 1;
            }
        }
        let mean_reward: Vec<f64> = sum.iter().map(|s| s / e).collect();
        Ok(SimulationStats {
            epochs: outcomes.len() as u64,
            reward_variance: (0..n)
                .map(|i| (sum_sq[i] / e - mean_reward[i] * mean_reward[i]).max(0.0))
                .collect(),
            mean_reward,
            share_rmse: err_sq.iter().map(|s| libm::sqrt(s / e)).collect(),
            leader_frequency: leaders.iter().map(|&c| c as f64 / e).collect(),
            mean_m_prime: m_prime / e,
            total_partials: partials,
            identity_violations,
        })
    }

    /// Root of the mean squared share error over all miners.
    pub fn pooled_share_rmse(&self) -> f64 {
        let n = self.share_rmse.len() as f64;
        libm::sqrt(self.share_rmse.iter().map(|r| r * r).sum::<f64>() / n)
    }
}

pub fn run_outcomes(
    h: &Configuration,
    params: &ProtocolParams,
    rule: &AllocationRule,
    epochs: u64,
) -> Result<Vec<EpochOutcome>, SimError> {
    if epochs == 0 {
        return Err(SimError::NoEpochs);
    }
    (0..epochs).map(|e| run_epoch(h, params, rule, e)).collect()
}

pub fn run_simulation(
    h: &Configuration,
    params: &ProtocolParams,
    rule: &AllocationRule,
    epochs: u64,
) -> Result<SimulationStats, SimError> {
    let outcomes = run_outcomes(h, params, rule, epochs)?;
    SimulationStats::from_outcomes(h, params, &outcomes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub randomized: SimulationStats,
    pub deterministic: SimulationStats,
    /// Epochs whose realized rewards agree exactly across the two semantics.
    pub identical_epochs: u64,
    /// Epochs whose per-miner squared deviation from the mean agrees across
    /// the two semantics.
    pub equal_variance_epochs: u64,
}

impl VarianceReport {
    /// Largest ratio of deterministic to randomized variance over miners.
    pub fn variance_ratio(&self) -> f64 {
        self.deterministic
            .reward_variance
            .iter()
            .zip(&self.randomized.reward_variance)
            .map(|(d, r)| {
                if *r == 0.0 {
                    if *d == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    d / r
                }
            })
            .fold(0.0, f64::max)
    }
}

pub fn compare_outcomes(
    h: &Configuration,
    params: &ProtocolParams,
    randomized: &[EpochOutcome],
    deterministic: &[EpochOutcome],
) -> Result<VarianceReport, SimError> {
    let r = SimulationStats::from_outcomes(h, params, randomized)?;
    let d = SimulationStats::from_outcomes(h, params, deterministic)?;
    let mut identical = 0;
    let mut equal_variance = 0;
    for (a, b) in randomized.iter().zip(deterministic) {
        if a.rewards
            .iter()
            .zip(&b.rewards)
            .all(|(x, y)| x.compare(y).is_eq())
        {
            identical += 1;
        }
        let same = (0..h.len()).all(|i| {
            let x = a.rewards[i].to_f64() - r.mean_reward[i];
            let y = b.rewards[i].to_f64() - d.mean_reward[i];
            x * x == y * y
        });
        if same {
            equal_variance += 1;
        }
    }
    Ok(VarianceReport {
        randomized: r,
        deterministic: d,
        identical_epochs: identical,
        equal_variance_epochs: equal_variance,
    })
}

/// The proportional rule under both semantics on identical event streams.
pub fn variance_study(
    h: &Configuration,
    params: &ProtocolParams,
    epochs: u64,
) -> Result<VarianceReport, SimError> {
    let randomized = AllocationRule::proportional();
    let deterministic = AllocationRule::proportional().with_semantics(Semantics::Deterministic);
    let a = run_outcomes(h, params, &randomized, epochs)?;
    let b = run_outcomes(h, params, &deterministic, epochs)?;
    compare_outcomes(h, params, &a, &b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub m: u64,
    pub share_rmse: f64,
    /// `share_rmse · √M`.
    pub scaled: f64,
}

/// Pooled share RMSE for each `M`, reusing the seed.
pub fn estimate_error_curve(
    h: &Configuration,
    ms: &[u64],
    rho: u64,
    seed: u64,
    epochs: u64,
) -> Result<Vec<CurvePoint>, SimError> {
    let rule = AllocationRule::all_zero();
    ms.iter()
        .map(|&m| {
            let params = ProtocolParams::new(m, rho, seed)?;
            let stats = run_simulation(h, &params, &rule, epochs)?;
            Ok(curve_point(m, &stats))
        })
        .collect()
}

pub fn curve_point(m: u64, stats: &SimulationStats) -> CurvePoint {
    let share_rmse = stats.pooled_share_rmse();
    CurvePoint {
        m,
        share_rmse,
        scaled: share_rmse * libm::sqrt(m as f64),
    }
}

/// `E[1/M′]` for `M′` geometric with success probability `1/M`:
/// `ln M / (M − 1)`, and 1 at `M = 1`.
pub fn expected_inverse_events(m: u64) -> f64 {
    if m == 1 {
        1.0
    } else {
        let m = m as f64;
        libm::log(m) / (m - 1.0)
    }
}

/// Predicted RMSE of `g_i / M′` for a miner with share `p`.
pub fn predicted_share_rmse(p: f64, m: u64) -> f64 {
    libm::sqrt(p * (1.0 - p) * expected_inverse_events(m))
}

/// A short CSV record per miner and epoch.
pub fn csv_header() -> &'static str {
    "epoch,miner,g_i,M_prime,h_hat,reward,leader_flag"
}

pub fn csv_rows(outcome: &EpochOutcome) -> Vec<alloc::string::String> {
    (0..outcome.partial_counts.len())
        .map(|i| {
            format!(
                "{},{},{},{},{},{},{}",
                outcome.epoch,
                i,
                outcome.partial_counts[i],
                outcome.m_prime,
                crate::amount::format_ratio(&outcome.estimates[i]),
                outcome.rewards[i],
                u8::from(outcome.leader == i)
            )
        })
        .collect()
}
