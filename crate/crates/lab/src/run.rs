//! Dispatch from a validated configuration to the core library, plus report
//! rendering.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use reward_axioms::matrix::AxiomMatrix;
use reward_axioms::search::{
    search, search_generalized, search_proportional, verify_deterministic_with,
    verify_risk_averse_with, verify_risk_seeking_with, AxiomSet, DeterministicEntry,
    ImpossibilityReport, PossibilityReport, SearchReport,
};
use reward_axioms::sim::{
    csv_header, csv_rows, predicted_share_rmse, CurvePoint, EpochOutcome, ProtocolParams,
    SimulationStats, VarianceReport,
};
use reward_axioms::{
    catalog, AllocationRule, Axiom, AxiomError, AxiomVerdict, CheckOptions, Configuration, Outcome,
    SearchError, SharingFamily, SimError,
};

use crate::cli::{Claim, Command, Expect, ExperimentConfig, Format};
use crate::manifest::{mismatches, read_manifest, ManifestError};
use crate::parallel;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Axiom(#[from] AxiomError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Report {
    Verdicts(Vec<AxiomVerdict>),
    Matrix(AxiomMatrix),
    Search {
        theorem: u8,
        report: SearchReport,
    },
    RiskAverse(Vec<ImpossibilityReport>),
    RiskSeeking(PossibilityReport),
    Deterministic(Vec<DeterministicEntry>),
    Simulation {
        rates: Configuration,
        params: ProtocolParams,
        rule: String,
        stats: SimulationStats,
        #[serde(skip)]
        outcomes: Vec<EpochOutcome>,
    },
    Variance {
        rates: Configuration,
        params: ProtocolParams,
        report: VarianceReport,
    },
    Curve {
        rates: Configuration,
        points: Vec<CurvePoint>,
    },
}

impl Report {
    /// Whether the result agrees with what the library predicts, for reports
    /// that carry a prediction.
    pub fn holds(&self) -> bool {
        match self {
            Report::Verdicts(vs) => vs.iter().all(AxiomVerdict::passed),
            Report::Matrix(m) => m.matches_claims() && m.grade_order_holds(),
            Report::Search { report, .. } => report.matches_prediction.unwrap_or(true),
            Report::RiskAverse(rs) => rs.iter().all(ImpossibilityReport::holds),
            Report::RiskSeeking(r) => r.holds(),
            Report::Deterministic(es) => es.iter().all(DeterministicEntry::agrees),
            Report::Simulation { stats, .. } => stats.identity_violations == 0,
            Report::Variance { report, .. } => {
                report.randomized.identity_violations == 0
                    && report.deterministic.identity_violations == 0
            }
            Report::Curve { .. } => true,
        }
    }

    fn verdicts(&self) -> Vec<&AxiomVerdict> {
        match self {
            Report::Verdicts(vs) => vs.iter().collect(),
            Report::Matrix(m) => m.rows.iter().flat_map(|r| r.verdicts.iter()).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    /// Expectation failures; empty on success.
    pub mismatches: Vec<String>,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = config.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| RunError::Pool(e.to_string()))?;
    let report = pool.install(|| compute(config))?;
    let mismatches = judge(config, &report)?;
    Ok(RunOutcome { report, mismatches })
}

fn compute(config: &ExperimentConfig) -> Result<Report, RunError> {
    let checker = &parallel::check;
    Ok(match &config.command {
        Command::Check {
            rules,
            axioms,
            universe,
            utilities,
            sharing_grid,
        } => {
            let opts = CheckOptions {
                utilities: (!utilities.is_empty()).then(|| utilities.clone()),
                family: SharingFamily {
                    grid: *sharing_grid,
                    ..SharingFamily::default()
                },
                coalition_sizes: None,
            };
            let mut out = Vec::new();
            for rule in rules {
                for &axiom in axioms {
                    out.push(parallel::check(rule, universe, axiom, &opts)?);
                }
            }
            Report::Verdicts(out)
        }
        Command::Matrix { universe } => Report::Matrix(parallel::matrix(
            &catalog(),
            universe,
            &CheckOptions::risk_neutral(),
        )?),
        Command::Search {
            theorem,
            universe,
            grid,
            drop,
        } => {
            let report = match (theorem, drop) {
                (1, None) => search_proportional(*universe, *grid)?,
                (2, None) => search_generalized(*universe, *grid)?,
                (1, Some(a)) => search(*universe, *grid, AxiomSet::uniqueness().without(*a))?,
                (_, Some(a)) => search(
                    *universe,
                    *grid,
                    AxiomSet::generalized_uniqueness().without(*a),
                )?,
                _ => return Err(RunError::Unsupported(format!("search {theorem}"))),
            };
            Report::Search {
                theorem: *theorem,
                report,
            }
        }
        Command::Verify {
            claim,
            universe,
            utilities,
            rules,
            sharing_grid,
        } => match claim {
            Claim::RiskAverse => {
                let rules: Vec<AllocationRule> = if rules.is_empty() {
                    catalog().into_iter().map(|e| e.rule).collect()
                } else {
                    rules.clone()
                };
                Report::RiskAverse(
                    utilities
                        .iter()
                        .map(|u| verify_risk_averse_with(universe, &rules, u, checker))
                        .collect::<Result<_, _>>()?,
                )
            }
            Claim::RiskSeeking => {
                let family = SharingFamily {
                    grid: *sharing_grid,
                    ..SharingFamily::default()
                };
                Report::RiskSeeking(verify_risk_seeking_with(
                    universe, utilities, family, checker,
                )?)
            }
            Claim::Deterministic => Report::Deterministic(verify_deterministic_with(
                universe,
                &AllocationRule::proportional(),
                utilities,
                checker,
            )?),
        },
        Command::Simulate {
            rule,
            rates,
            m,
            rho,
            epochs,
            compare,
        } => {
            let params = ProtocolParams::new(*m, *rho, config.seed)?;
            if *compare {
                Report::Variance {
                    rates: rates.clone(),
                    params,
                    report: parallel::variance_study(rates, &params, *epochs)?,
                }
            } else {
                let (stats, outcomes) = parallel::simulate(rates, &params, rule, *epochs)?;
                Report::Simulation {
                    rates: rates.clone(),
                    params,
                    rule: reward_axioms::Rule::label(rule),
                    stats,
                    outcomes,
                }
            }
        }
        Command::Curve {
            rates,
            ms,
            rho,
            epochs,
        } => Report::Curve {
            rates: rates.clone(),
            points: parallel::error_curve(rates, ms, *rho, config.seed, *epochs)?,
        },
    })
}

fn judge(config: &ExperimentConfig, report: &Report) -> Result<Vec<String>, RunError> {
    let holds = report.holds();
    Ok(match &config.expect {
        Some(Expect::Pass) if !holds => vec!["expected every result to pass".into()],
        Some(Expect::Fail) if holds => vec!["expected a failing result".into()],
        Some(Expect::Manifest(path)) => {
            let verdicts = report.verdicts();
            if verdicts.is_empty() {
                return Err(RunError::Unsupported(
                    "manifests apply to check and matrix".into(),
                ));
            }
            mismatches(&read_manifest(path)?, verdicts.iter().copied())
        }
        Some(_) => Vec::new(),
        None => match report {
            Report::Verdicts(_) => Vec::new(),
            _ if holds => Vec::new(),
            Report::Matrix(m) => m
                .discrepancies()
                .map(|d| {
                    format!(
                        "{} {}: claimed {}, observed {}",
                        d.rule, d.axiom, d.claimed, d.observed
                    )
                })
                .collect(),
            _ => vec!["result contradicts the prediction".into()],
        },
    })
}

fn mark(v: &AxiomVerdict) -> &'static str {
    if v.passed() {
        "pass"
    } else {
        "FAIL"
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn witness_text(v: &AxiomVerdict) -> String {
    match &v.outcome {
        Outcome::Pass => String::new(),
        Outcome::Fail(w) => w.to_string(),
    }
}

fn floats(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render(report: &Report, format: Format) -> Result<String, RunError> {
    if format == Format::Json {
        let mut s = serde_json::to_string_pretty(report)
            .map_err(|e| RunError::Unsupported(e.to_string()))?;
        s.push('\n');
        return Ok(s);
    }
    let csv = format == Format::Csv;
    let mut s = String::new();
    let w = &mut s;
    match report {
        Report::Verdicts(vs) => {
            if csv {
                writeln!(w, "rule,axiom,result,witness").ok();
            }
            for v in vs {
                if csv {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        csv_field(&v.rule),
                        v.axiom,
                        mark(v),
                        csv_field(&witness_text(v))
                    )
                    .ok();
                } else {
                    writeln!(w, "{v}").ok();
                }
            }
        }
        Report::Matrix(m) => {
            if csv {
                writeln!(w, "rule,{}", Axiom::ALL.map(|a| a.to_string()).join(",")).ok();
            } else {
                writeln!(w, "universe {}", m.universe).ok();
                write!(w, "{:<24}", "rule").ok();
                for a in Axiom::ALL {
                    write!(w, "{:>6}", a.to_string()).ok();
                }
                writeln!(w).ok();
            }
            for row in &m.rows {
                let cells: Vec<String> = Axiom::ALL
                    .iter()
                    .map(|&a| {
                        let passed = row.passed(a).unwrap_or(false);
                        let disputed = row.discrepancies.iter().any(|d| d.axiom == a);
                        format!(
                            "{}{}",
                            if passed { "pass" } else { "fail" },
                            if disputed { "!" } else { "" }
                        )
                    })
                    .collect();
                if csv {
                    writeln!(w, "{},{}", csv_field(&row.rule), cells.join(",")).ok();
                } else {
                    write!(w, "{:<24}", row.rule).ok();
                    for c in cells {
                        write!(w, "{c:>6}").ok();
                    }
                    writeln!(w).ok();
                }
            }
            if !csv {
                let n = m.discrepancies().count();
                writeln!(w, "{n} disagreement(s) with the catalog claims").ok();
                for row in &m.rows {
                    for v in row.verdicts.iter().filter(|v| !v.passed()) {
                        writeln!(w, "  {} {}: {}", row.rule, v.axiom, witness_text(v)).ok();
                    }
                }
            }
        }
        Report::Search { report, .. } => {
            let axioms: Vec<String> = report.axioms.iter().map(|a| a.to_string()).collect();
            if csv {
                writeln!(w, "survivor,c").ok();
                for (i, c) in report.scaling.iter().enumerate() {
                    let c: Vec<String> =
                        c.iter().map(reward_axioms::amount::format_ratio).collect();
                    writeln!(w, "{i},{}", c.join(" ")).ok();
                }
            } else {
                writeln!(
                    w,
                    "axioms {} over {} on the 1/{} grid: {} survivor(s), {} partial tables examined",
                    axioms.join(","),
                    report.universe,
                    report.grid,
                    report.survivors.len(),
                    report.nodes
                )
                .ok();
                for (i, t) in report.survivors.iter().enumerate() {
                    let c: Vec<String> = report.scaling[i]
                        .iter()
                        .map(reward_axioms::amount::format_ratio)
                        .collect();
                    let shape = if t.is_generalized_proportional() {
                        "c(m)·h_i/m"
                    } else {
                        "other"
                    };
                    writeln!(w, "  #{i}: {shape}, c = ({})", c.join(", ")).ok();
                }
                match report.matches_prediction {
                    Some(true) => writeln!(w, "matches the predicted survivor set").ok(),
                    Some(false) => writeln!(w, "DOES NOT match the predicted survivor set").ok(),
                    None => None,
                };
            }
        }
        Report::RiskAverse(reports) => {
            if csv {
                writeln!(w, "utility,rule,nonzero,violated,two_way,witness").ok();
            }
            for r in reports {
                if !csv {
                    writeln!(w, "utility {} over {}", r.utility, r.universe).ok();
                }
                for e in &r.entries {
                    let violated = e
                        .violation
                        .as_ref()
                        .map(|v| v.axiom.to_string())
                        .unwrap_or_default();
                    let witness = e.violation.as_ref().map(witness_text).unwrap_or_default();
                    if csv {
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            csv_field(&r.utility),
                            csv_field(&e.rule),
                            e.nonzero,
                            violated,
                            e.two_way.map(|b| b.to_string()).unwrap_or_default(),
                            csv_field(&witness)
                        )
                        .ok();
                    } else if !e.nonzero {
                        writeln!(w, "  {:<24} zero rule, exempt", e.rule).ok();
                    } else {
                        writeln!(w, "  {:<24} violates {violated}: {witness}", e.rule).ok();
                    }
                }
                if !csv {
                    writeln!(
                        w,
                        "  {}",
                        if r.holds() {
                            "every nonzero rule violates an axiom"
                        } else {
                            "SOME RULE SURVIVES"
                        }
                    )
                    .ok();
                }
            }
        }
        Report::RiskSeeking(r) => {
            if csv {
                writeln!(w, "utility,shape,expected,result,witness").ok();
                for e in &r.entries {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        csv_field(&e.utility),
                        e.shape,
                        if e.expected_pass { "pass" } else { "fail" },
                        mark(&e.verdict),
                        csv_field(&witness_text(&e.verdict))
                    )
                    .ok();
                }
            } else {
                writeln!(
                    w,
                    "proportional rule over {}, sharing: {}",
                    r.universe, r.family
                )
                .ok();
                for v in &r.baseline {
                    writeln!(w, "  {v}").ok();
                }
                for e in &r.entries {
                    writeln!(
                        w,
                        "  {} ({}): A4a {} (expected {})",
                        e.utility,
                        e.shape,
                        mark(&e.verdict),
                        if e.expected_pass { "pass" } else { "fail" }
                    )
                    .ok();
                }
            }
        }
        Report::Deterministic(entries) => {
            if csv {
                writeln!(w, "utility,deterministic,risk_neutral").ok();
            }
            for e in entries {
                if csv {
                    writeln!(
                        w,
                        "{},{},{}",
                        csv_field(&e.utility),
                        mark(&e.deterministic),
                        mark(&e.risk_neutral)
                    )
                    .ok();
                } else {
                    writeln!(
                        w,
                        "{:<16} deterministic A4c {}, risk-neutral A4c {}",
                        e.utility,
                        mark(&e.deterministic),
                        mark(&e.risk_neutral)
                    )
                    .ok();
                }
            }
        }
        Report::Simulation {
            rates,
            params,
            rule,
            stats,
            outcomes,
        } => {
            if csv {
                writeln!(w, "{}", csv_header()).ok();
                for o in outcomes {
                    for row in csv_rows(o) {
                        writeln!(w, "{row}").ok();
                    }
                }
            } else {
                writeln!(
                    w,
                    "{rule} on {rates}, M={}, rho={}, seed={}, {} epochs",
                    params.m, params.rho, params.seed, stats.epochs
                )
                .ok();
                writeln!(w, "mean reward      {}", floats(&stats.mean_reward)).ok();
                writeln!(w, "reward variance  {}", floats(&stats.reward_variance)).ok();
                writeln!(w, "share RMSE       {}", floats(&stats.share_rmse)).ok();
                let total = rates.total() as f64;
                let predicted: Vec<f64> = rates
                    .rates()
                    .iter()
                    .map(|&r| predicted_share_rmse(r as f64 / total, params.m))
                    .collect();
                writeln!(w, "predicted RMSE   {}", floats(&predicted)).ok();
                writeln!(w, "leader frequency {}", floats(&stats.leader_frequency)).ok();
                writeln!(w, "mean M'          {:.2}", stats.mean_m_prime).ok();
                writeln!(
                    w,
                    "estimate identity violations: {}",
                    stats.identity_violations
                )
                .ok();
            }
        }
        Report::Variance {
            rates,
            params,
            report,
        } => {
            if csv {
                writeln!(w, "miner,randomized_mean,randomized_variance,deterministic_mean,deterministic_variance,leader_frequency").ok();
                for i in 0..rates.len() {
                    writeln!(
                        w,
                        "{i},{},{},{},{},{}",
                        report.randomized.mean_reward[i],
                        report.randomized.reward_variance[i],
                        report.deterministic.mean_reward[i],
                        report.deterministic.reward_variance[i],
                        report.randomized.leader_frequency[i]
                    )
                    .ok();
                }
            } else {
                writeln!(
                    w,
                    "proportional on {rates}, M={}, seed={}, {} epochs",
                    params.m, params.seed, report.randomized.epochs
                )
                .ok();
                writeln!(
                    w,
                    "randomized variance     {}",
                    floats(&report.randomized.reward_variance)
                )
                .ok();
                writeln!(
                    w,
                    "deterministic variance  {}",
                    floats(&report.deterministic.reward_variance)
                )
                .ok();
                writeln!(w, "ratio (max)             {:.6}", report.variance_ratio()).ok();
                writeln!(
                    w,
                    "leader frequency        {}",
                    floats(&report.randomized.leader_frequency)
                )
                .ok();
                writeln!(w, "identical epochs        {}", report.identical_epochs).ok();
            }
        }
        Report::Curve { rates, points } => {
            let total = rates.total() as f64;
            let p = rates.rates()[0] as f64 / total;
            if csv {
                writeln!(w, "M,share_rmse,scaled,predicted").ok();
            } else {
                writeln!(w, "share-estimate RMSE on {rates}").ok();
                writeln!(
                    w,
                    "{:>8} {:>12} {:>12} {:>12}",
                    "M", "RMSE", "RMSE*sqrt(M)", "predicted"
                )
                .ok();
            }
            for pt in points {
                // Pooled over miners; the prediction uses the first miner's share,
                // which equals every miner's p(1-p) for two miners.
                let predicted = if rates.len() == 2 {
                    predicted_share_rmse(p, pt.m)
                } else {
                    f64::NAN
                };
                if csv {
                    writeln!(w, "{},{},{},{}", pt.m, pt.share_rmse, pt.scaled, predicted).ok();
                } else {
                    writeln!(
                        w,
                        "{:>8} {:>12.6} {:>12.6} {:>12.6}",
                        pt.m, pt.share_rmse, pt.scaled, predicted
                    )
                    .ok();
                }
            }
        }
    }
    Ok(s)
}

/// Executes, renders, writes the report and returns the process exit code:
/// 0 on success, 1 when results contradict expectations, 3 on runtime errors.
pub fn run(config: &ExperimentConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match execute(config) {
        Ok(o) => o,
        Err(e) => {
            writeln!(stderr, "error: {e}").ok();
            return 3;
        }
    };
    let text = match render(&outcome.report, config.format) {
        Ok(t) => t,
        Err(e) => {
            writeln!(stderr, "error: {e}").ok();
            return 3;
        }
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, &text).map_err(|source| RunError::Output {
            path: PathBuf::from(path).display().to_string(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| RunError::Output {
                path: "<stdout>".into(),
                source,
            }),
    };
    if let Err(e) = written {
        writeln!(stderr, "error: {e}").ok();
        return 3;
    }
    for m in &outcome.mismatches {
        writeln!(stderr, "mismatch: {m}").ok();
    }
    if outcome.success() {
        0
    } else {
        1
    }
}
