//! Rayon versions of the core loops. Each returns exactly what its
//! sequential counterpart returns.

use rayon::prelude::*;

use reward_axioms::axioms::{verdict_from_results, violation_at};
use reward_axioms::matrix::{AxiomMatrix, MatrixRow};
use reward_axioms::sim::{
    compare_outcomes, curve_point, CurvePoint, EpochOutcome, ProtocolParams, SimulationStats,
    VarianceReport,
};
use reward_axioms::{
    AllocationRule, Axiom, AxiomError, AxiomVerdict, CatalogEntry, CheckOptions, Configuration,
    Semantics, SimError, Universe,
};

/// Same verdict as `reward_axioms::check`: the first witness in universe order.
pub fn check(
    rule: &AllocationRule,
    universe: &Universe,
    axiom: Axiom,
    opts: &CheckOptions,
) -> Result<AxiomVerdict, AxiomError> {
    let configs = universe.configurations();
    let first = configs
        .par_iter()
        .map(|h| violation_at(rule, h, axiom, opts))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    verdict_from_results(rule, universe, axiom, opts, first.into_iter().collect())
}

pub fn matrix(
    entries: &[CatalogEntry],
    universe: &Universe,
    opts: &CheckOptions,
) -> Result<AxiomMatrix, AxiomError> {
    let rows = entries
        .par_iter()
        .map(|entry| {
            let verdicts = Axiom::ALL
                .par_iter()
                .map(|&a| check(&entry.rule, universe, a, opts))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(MatrixRow::from_verdicts(entry, verdicts))
        })
        .collect::<Result<Vec<_>, AxiomError>>()?;
    Ok(AxiomMatrix {
        universe: *universe,
        rows,
    })
}

pub fn outcomes(
    h: &Configuration,
    params: &ProtocolParams,
    rule: &AllocationRule,
    epochs: u64,
) -> Result<Vec<EpochOutcome>, SimError> {
    if epochs == 0 {
        return Err(SimError::NoEpochs);
    }
    (0..epochs)
        .into_par_iter()
        .map(|e| reward_axioms::sim::run_epoch(h, params, rule, e))
        .collect()
}

pub fn simulate(
    h: &Configuration,
    params: &ProtocolParams,
    rule: &AllocationRule,
    epochs: u64,
) -> Result<(SimulationStats, Vec<EpochOutcome>), SimError> {
    let out = outcomes(h, params, rule, epochs)?;
    Ok((SimulationStats::from_outcomes(h, params, &out)?, out))
}

pub fn variance_study(
    h: &Configuration,
    params: &ProtocolParams,
    epochs: u64,
) -> Result<VarianceReport, SimError> {
    let randomized = AllocationRule::proportional();
    let deterministic = AllocationRule::proportional().with_semantics(Semantics::Deterministic);
    let (a, b) = rayon::join(
        || outcomes(h, params, &randomized, epochs),
        || outcomes(h, params, &deterministic, epochs),
    );
    compare_outcomes(h, params, &a?, &b?)
}

pub fn error_curve(
    h: &Configuration,
    ms: &[u64],
    rho: u64,
    seed: u64,
    epochs: u64,
) -> Result<Vec<CurvePoint>, SimError> {
    let rule = AllocationRule::all_zero();
    ms.par_iter()
        .map(|&m| {
            let params = ProtocolParams::new(m, rho, seed)?;
            let (stats, _) = simulate(h, &params, &rule, epochs)?;
            Ok(curve_point(m, &stats))
        })
        .collect()
}
