//! Acceptance run: one `[PASS]` or `[FAIL]` line per criterion, exit status 1
//! if any criterion fails. Expected values are built here from first
//! principles rather than read back from the library.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use reward_axioms::amount::Ratio;
use reward_axioms::search::{
    search, search_generalized, search_proportional, verify_deterministic_with,
    verify_risk_averse_with, verify_risk_seeking_with, AxiomSet, RuleTable,
};
use reward_axioms::sim::{EpochOutcome, ProtocolParams};
use reward_axioms::utility::default_test_set;
use reward_axioms::{
    catalog, AllocationRule, Axiom, AxiomVerdict, CheckOptions, Configuration, Rule, Semantics,
    SharingFamily, Universe, UtilityFunction, Witness,
};
use reward_lab::parallel;

const SEED: u64 = 7;
const REPLAY_MARGIN: f64 = 1e-9;
const MEAN_TOLERANCE: f64 = 0.03;
const VARIANCE_FACTOR: f64 = 100.0;
const CONCAVE_MARGIN: f64 = 0.2;

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
}

struct Ledger {
    failed: usize,
    /// Fail verdicts from criteria 1-5 with the rule that produced them.
    verdicts: Vec<(AllocationRule, AxiomVerdict)>,
    /// Every simulated epoch, with its `ρ·M`.
    epochs: Vec<(u64, EpochOutcome)>,
}

impl Ledger {
    fn record(&mut self, c: Criterion, elapsed: Duration, result: Result<String, String>) {
        let over = c.limit.is_some_and(|l| elapsed > l);
        let (ok, detail) = match result {
            Ok(d) if over => (false, format!("{d}; over the {:?} limit", c.limit.unwrap())),
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if !ok {
            self.failed += 1;
        }
        println!(
            "[{}] {:>2} {}: {} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
    }

    fn keep_failures(&mut self, rule: &AllocationRule, verdicts: &[AxiomVerdict]) {
        for v in verdicts.iter().filter(|v| !v.passed()) {
            self.verdicts.push((rule.clone(), v.clone()));
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (Duration, T) {
    let start = Instant::now();
    let out = f();
    (start.elapsed(), out)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn power(n: i128, d: i128) -> UtilityFunction {
    UtilityFunction::power(Ratio::new(n, d)).unwrap()
}

/// Sorted-descending configurations with at most `n` miners and total at
/// most `m`, built by direct recursion.
fn representatives(n: usize, m: u64) -> Vec<Vec<u64>> {
    fn grow(prefix: &mut Vec<u64>, remaining: u64, cap: u64, n: usize, out: &mut Vec<Vec<u64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if prefix.len() == n {
            return;
        }
        for next in 1..=cap.min(remaining) {
            prefix.push(next);
            grow(prefix, remaining - next, next, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), m, m, n, &mut out);
    out
}

type Table = BTreeMap<Vec<u64>, Vec<Ratio>>;

fn as_table(rt: &RuleTable) -> Table {
    rt.table
        .entries()
        .map(|(k, v)| (k.to_vec(), v.to_vec()))
        .collect()
}

/// `c(Σh)·h_i/Σh` on every representative.
fn scaled_table(reps: &[Vec<u64>], c: &[Ratio]) -> Table {
    reps.iter()
        .map(|h| {
            let total: u64 = h.iter().sum();
            let cm = c[total as usize - 1];
            let values = h
                .iter()
                .map(|&r| cm * Ratio::new(r as i128, total as i128))
                .collect();
            (h.clone(), values)
        })
        .collect()
}

fn on_grid(x: &Ratio, grid: u64) -> bool {
    (*x * Ratio::from_integer(grid as i128)).is_integer()
}

// Hand-written expectations for the catalog rules.
fn claim_table() -> Vec<(&'static str, Vec<(Axiom, bool)>)> {
    use Axiom::*;
    let gp = vec![(A1, true), (A2b, true), (A3, true), (A4a, true)];
    vec![
        (
            "proportional",
            vec![(A1, true), (A2a, true), (A3, true), (A4a, true)],
        ),
        (
            "allzero",
            vec![
                (A1, true),
                (A2b, true),
                (A3, true),
                (A4a, true),
                (A2a, false),
            ],
        ),
        ("genprop:const:1/2", gp.clone()),
        ("genprop:step:4:1/2:1", gp),
        (
            "squares",
            vec![(A1, true), (A2a, true), (A3, true), (A4c, false)],
        ),
        (
            "sqrts",
            vec![(A1, true), (A2a, true), (A4a, true), (A3, false)],
        ),
        (
            "halfthreshold",
            vec![
                (A1, true),
                (A2b, true),
                (A3, true),
                (A4c, true),
                (A4b, false),
            ],
        ),
    ]
}

fn criterion_1(ledger: &mut Ledger) {
    let c = Criterion {
        id: 1,
        name: "catalog axiom matrix over n<=4, m<=8",
        limit: Some(Duration::from_secs(300)),
    };
    let u = Universe::new(4, 8).unwrap();
    let (t, result) = timed(|| parallel::matrix(&catalog(), &u, &CheckOptions::risk_neutral()));
    let result = result.map_err(|e| e.to_string()).and_then(|m| {
        let entries = catalog();
        let mut checked = 0;
        for (name, claims) in claim_table() {
            let row = m
                .rows
                .iter()
                .find(|r| r.rule == name)
                .ok_or(format!("no row for {name}"))?;
            let entry = entries.iter().find(|e| e.name == name).unwrap();
            ledger.keep_failures(&entry.rule, &row.verdicts);
            for (axiom, expected) in claims {
                let got = row
                    .passed(axiom)
                    .ok_or(format!("{name} has no {axiom} verdict"))?;
                ensure(got == expected, || {
                    format!("{name} {axiom}: expected {expected}, got {got}")
                })?;
                checked += 1;
            }
        }
        Ok(format!(
            "{checked} claims across {} rules agree",
            m.rows.len()
        ))
    });
    ledger.record(c, t, result);
}

fn criterion_2(ledger: &mut Ledger) {
    let c = Criterion {
        id: 2,
        name: "strong-budget search on n<=3, m<=3, L=6",
        limit: Some(Duration::from_secs(600)),
    };
    let u = Universe::new(3, 3).unwrap();
    let (t, result) = timed(|| {
        let strict = search_proportional(u, 6).map_err(|e| e.to_string())?;
        let loose =
            search(u, 6, AxiomSet::uniqueness().without(Axiom::A4c)).map_err(|e| e.to_string())?;
        let reps = representatives(3, 3);
        let ones = vec![Ratio::from_integer(1); 3];
        let proportional = scaled_table(&reps, &ones);
        ensure(strict.survivors.len() == 1, || {
            format!("{} survivors, expected 1", strict.survivors.len())
        })?;
        ensure(as_table(&strict.survivors[0]) == proportional, || {
            format!(
                "survivor is not h_i/m: {:?}",
                as_table(&strict.survivors[0])
            )
        })?;
        ensure(loose.survivors.len() >= 2, || {
            format!("{} survivors without A4c", loose.survivors.len())
        })?;
        Ok(format!(
            "1 survivor equal to h_i/m on {} configurations; {} survivors without A4c",
            reps.len(),
            loose.survivors.len()
        ))
    });
    ledger.record(c, t, result);
}

fn criterion_3(ledger: &mut Ledger) {
    let c = Criterion {
        id: 3,
        name: "weak-budget search on n<=3, m<=3, L=6",
        limit: Some(Duration::from_secs(600)),
    };
    let (t, result) = timed(|| {
        let report =
            search_generalized(Universe::new(3, 3).unwrap(), 6).map_err(|e| e.to_string())?;
        let reps = representatives(3, 3);
        // Every nondecreasing c with values in {0, 1/6, ..., 1} whose table
        // lands on the grid.
        let grid: Vec<Ratio> = (0..=6).map(|k| Ratio::new(k, 6)).collect();
        let mut expected = BTreeSet::new();
        for &c1 in &grid {
            for &c2 in grid.iter().filter(|&&c2| c2 >= c1) {
                for &c3 in grid.iter().filter(|&&c3| c3 >= c2) {
                    let table = scaled_table(&reps, &[c1, c2, c3]);
                    if table.values().flatten().all(|x| on_grid(x, 6)) {
                        expected.insert(table);
                    }
                }
            }
        }
        let got: BTreeSet<Table> = report.survivors.iter().map(as_table).collect();
        ensure(got.len() == report.survivors.len(), || {
            "duplicate survivors".into()
        })?;
        let missing = expected.difference(&got).count();
        let extra = got.difference(&expected).count();
        ensure(missing == 0 && extra == 0, || {
            format!("{missing} c(m)h_i/m tables missing, {extra} survivors of another form")
        })?;
        Ok(format!(
            "{} survivors, each c(m)h_i/m for an on-grid nondecreasing c, none missing",
            got.len()
        ))
    });
    ledger.record(c, t, result);
}

fn criterion_4(ledger: &mut Ledger) {
    let c = Criterion {
        id: 4,
        name: "concave utilities on n<=3, m<=4",
        limit: Some(Duration::from_secs(60)),
    };
    let u = Universe::new(3, 4).unwrap();
    let rules: Vec<AllocationRule> = catalog().into_iter().map(|e| e.rule).collect();
    let allowed = [Axiom::A1, Axiom::A2b, Axiom::A3, Axiom::A4c];
    let (t, result) = timed(|| {
        let mut summary = Vec::new();
        for (alpha, util) in [(0.5, power(1, 2)), (0.9, power(9, 10))] {
            let report = verify_risk_averse_with(&u, &rules, &util, &parallel::check)
                .map_err(|e| e.to_string())?;
            let mut failing = 0;
            for (rule, entry) in rules.iter().zip(&report.entries) {
                let nonzero = u.configurations().iter().any(|h| {
                    rule.evaluate(h)
                        .unwrap()
                        .rewards()
                        .iter()
                        .any(|x| !x.is_zero())
                });
                if !nonzero {
                    continue;
                }
                let v = entry
                    .violation
                    .as_ref()
                    .ok_or(format!("{} passes with p^{alpha}", entry.rule))?;
                ensure(allowed.contains(&v.axiom), || {
                    format!("{} fails {} only", entry.rule, v.axiom)
                })?;
                ledger.keep_failures(rule, std::slice::from_ref(v));
                failing += 1;
            }
            let prop = report.entries[0]
                .violation
                .as_ref()
                .ok_or("proportional passes")?;
            let Some(Witness::Collusion { merge, members, .. }) = prop.witness() else {
                return Err(format!(
                    "proportional witness is not a merge: {:?}",
                    prop.witness()
                ));
            };
            ensure(
                merge.base.rates() == [1, 1] && merge.merged_rate == 2,
                || format!("proportional witness is {merge}"),
            )?;
            // Before: the whole reward with probability 1/2. After: half of it for sure.
            let before = 0.5;
            let after = 0.5f64.powf(alpha);
            for m in members {
                ensure(
                    (m.before.to_f64() - before).abs() < 1e-12
                        && (m.after.to_f64() - after).abs() < 1e-12,
                    || format!("member {} utilities {} -> {}", m.miner, m.before, m.after),
                )?;
            }
            let margin = prop.replay(&rules[0]).map_err(|e| e.to_string())?;
            if alpha == 0.5 {
                ensure(margin > CONCAVE_MARGIN, || {
                    format!("margin {margin} at alpha 0.5")
                })?;
            }
            summary.push(format!(
                "p^{alpha}: {failing} nonzero rules fail, (1,1)->(2) margin {margin:.4}"
            ));
        }
        Ok(summary.join("; "))
    });
    ledger.record(c, t, result);
}

fn criterion_5(ledger: &mut Ledger) {
    let c = Criterion {
        id: 5,
        name: "convex utilities on n<=4, m<=8",
        limit: Some(Duration::from_secs(600)),
    };
    let u = Universe::new(4, 8).unwrap();
    let family = SharingFamily::default();
    let (t, result) = timed(|| {
        let report =
            verify_risk_seeking_with(&u, &[power(11, 10), power(2, 1)], family, &parallel::check)
                .map_err(|e| e.to_string())?;
        let prop = AllocationRule::proportional();
        ledger.keep_failures(&prop, &report.baseline);
        for e in &report.entries {
            ledger.keep_failures(&prop, std::slice::from_ref(&e.verdict));
            ensure(e.verdict.passed(), || {
                format!("{}: {}", e.utility, e.verdict)
            })?;
        }
        ensure(
            family.grid == 16 && family.proportional && family.fixed_fractions && family.lotteries,
            || format!("sharing family is {family}"),
        )?;
        Ok(format!(
            "proportional passes utility-A4a for p^1.1 and p^2 against {family}"
        ))
    });
    ledger.record(c, t, result);
}

fn criterion_6(ledger: &mut Ledger) {
    let c = Criterion {
        id: 6,
        name: "deterministic payouts on n<=4, m<=8",
        limit: None,
    };
    let u = Universe::new(4, 8).unwrap();
    let utilities = default_test_set();
    let (t, result) = timed(|| {
        let rule = AllocationRule::proportional();
        let entries = verify_deterministic_with(&u, &rule, &utilities, &parallel::check)
            .map_err(|e| e.to_string())?;
        ensure(entries.len() == utilities.len(), || {
            "missing utilities".into()
        })?;
        for e in &entries {
            ensure(
                e.deterministic.scope.semantics == Semantics::Deterministic,
                || {
                    format!(
                        "{} checked under {:?}",
                        e.utility, e.deterministic.scope.semantics
                    )
                },
            )?;
            ensure(e.deterministic.passed() && e.risk_neutral.passed(), || {
                format!(
                    "{}: deterministic {}, risk-neutral {}",
                    e.utility, e.deterministic, e.risk_neutral
                )
            })?;
        }
        Ok(format!(
            "utility-A4c passes for all {} utilities, as it does risk-neutrally",
            entries.len()
        ))
    });
    ledger.record(c, t, result);
}

fn simulate(
    ledger: &mut Ledger,
    rates: &[u64],
    m: u64,
    rule: &AllocationRule,
    epochs: u64,
) -> Vec<EpochOutcome> {
    let h = Configuration::new(rates.to_vec()).unwrap();
    let params = ProtocolParams::new(m, 1, SEED).unwrap();
    let out = parallel::outcomes(&h, &params, rule, epochs).unwrap();
    ledger.epochs.extend(out.iter().map(|o| (m, o.clone())));
    out
}

fn criterion_7(ledger: &mut Ledger) {
    let c = Criterion {
        id: 7,
        name: "share estimates for (5,3,2), M=1024",
        limit: Some(Duration::from_secs(60)),
    };
    let (m, epochs) = (1024u64, 2000);
    let (t, out) = timed(|| {
        simulate(
            ledger,
            &[5, 3, 2],
            m,
            &AllocationRule::proportional(),
            epochs,
        )
    });
    let shares = [0.5, 0.3, 0.2];
    let mut problems = Vec::new();
    let mut detail = Vec::new();
    for (i, &p) in shares.iter().enumerate() {
        let mse = out
            .iter()
            .map(|o| (o.partial_counts[i] as f64 / o.m_prime as f64 - p).powi(2))
            .sum::<f64>()
            / epochs as f64;
        let rmse = mse.sqrt();
        let bound = 2.0 * (p * (1.0 - p) / m as f64).sqrt();
        let mean = out.iter().map(|o| o.rewards[i].to_f64()).sum::<f64>() / epochs as f64;
        detail.push(format!(
            "p={p}: rmse {rmse:.5} vs {bound:.5}, mean reward {mean:.4}"
        ));
        if rmse > bound {
            problems.push(format!("rmse {rmse:.5} > {bound:.5} for p={p}"));
        }
        if (mean - p).abs() > MEAN_TOLERANCE {
            problems.push(format!(
                "mean {mean:.4} off {p} by more than {MEAN_TOLERANCE}"
            ));
        }
    }
    let result = if problems.is_empty() {
        Ok(detail.join("; "))
    } else {
        Err(format!("{} [{}]", problems.join("; "), detail.join("; ")))
    };
    ledger.record(c, t, result);
}

fn variances(out: &[EpochOutcome], miners: usize) -> Vec<f64> {
    let e = out.len() as f64;
    (0..miners)
        .map(|i| {
            let xs: Vec<f64> = out.iter().map(|o| o.rewards[i].to_f64()).collect();
            let mean = xs.iter().sum::<f64>() / e;
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / e
        })
        .collect()
}

fn criterion_8(ledger: &mut Ledger) {
    let c = Criterion {
        id: 8,
        name: "variance decoupling for (1,1)",
        limit: None,
    };
    let randomized = AllocationRule::proportional();
    let deterministic = AllocationRule::proportional().with_semantics(Semantics::Deterministic);
    let (t, result) = timed(|| {
        let epochs = 5000;
        let r = simulate(ledger, &[1, 1], 1024, &randomized, epochs);
        let d = simulate(ledger, &[1, 1], 1024, &deterministic, epochs);
        let same_events = r
            .iter()
            .zip(&d)
            .all(|(a, b)| a.partial_counts == b.partial_counts && a.m_prime == b.m_prime);
        ensure(same_events, || {
            "the two semantics saw different events".into()
        })?;
        let (vr, vd) = (variances(&r, 2), variances(&d, 2));
        for i in 0..2 {
            ensure(vd[i] <= vr[i] / VARIANCE_FACTOR, || {
                format!(
                    "miner {i}: deterministic {:.3e} > randomized {:.3e} / {VARIANCE_FACTOR}",
                    vd[i], vr[i]
                )
            })?;
        }
        // At M = 1 the single event decides everything: both semantics pay
        // the finder one block reward, so every epoch's squared deviation agrees.
        let r1 = simulate(ledger, &[1, 1], 1, &randomized, epochs);
        let d1 = simulate(ledger, &[1, 1], 1, &deterministic, epochs);
        let (mr, md) = (variances(&r1, 2), variances(&d1, 2));
        let mean = |out: &[EpochOutcome], i: usize| {
            out.iter().map(|o| o.rewards[i].to_f64()).sum::<f64>() / epochs as f64
        };
        let (mean_r, mean_d) = ([mean(&r1, 0), mean(&r1, 1)], [mean(&d1, 0), mean(&d1, 1)]);
        let per_epoch = r1.iter().zip(&d1).all(|(a, b)| {
            (0..2).all(|i| {
                (a.rewards[i].to_f64() - mean_r[i]).powi(2)
                    == (b.rewards[i].to_f64() - mean_d[i]).powi(2)
            })
        });
        ensure(per_epoch && mr == md, || {
            format!("M=1 variances differ: {mr:?} vs {md:?}")
        })?;
        Ok(format!(
            "M=1024 deterministic/randomized {:.4}, {:.4}; M=1 identical over {epochs} epochs",
            vd[0] / vr[0],
            vd[1] / vr[1]
        ))
    });
    ledger.record(c, t, result);
}

fn criterion_9(ledger: &mut Ledger) {
    let c = Criterion {
        id: 9,
        name: "estimator identity",
        limit: None,
    };
    let (t, result) = timed(|| {
        for (m, o) in &ledger.epochs {
            let events: u64 = o.partial_counts.iter().sum();
            let total: Ratio = o
                .partial_counts
                .iter()
                .map(|&g| Ratio::new(g as i128 * *m as i128, o.m_prime as i128))
                .sum();
            ensure(
                events == o.m_prime && total == Ratio::from_integer(*m as i128),
                || format!("epoch {} at M={m}: sum {total}", o.epoch),
            )?;
            ensure(o.estimate_total() == total, || {
                format!("epoch {} reports {}", o.epoch, o.estimate_total())
            })?;
        }
        Ok(format!(
            "sum of estimates equals rho*M in all {} epochs",
            ledger.epochs.len()
        ))
    });
    ledger.record(c, t, result);
}

fn criterion_10(ledger: &mut Ledger) {
    let c = Criterion {
        id: 10,
        name: "witness replay",
        limit: None,
    };
    let (t, result) = timed(|| {
        let mut worst = f64::INFINITY;
        for (rule, v) in &ledger.verdicts {
            let json = serde_json::to_string(v).map_err(|e| e.to_string())?;
            let back: AxiomVerdict = serde_json::from_str(&json).map_err(|e| e.to_string())?;
            ensure(&back == v, || {
                format!("{} {} changed in transit", v.rule, v.axiom)
            })?;
            let margin = back
                .replay(rule)
                .map_err(|e| format!("{} {}: {e}", v.rule, v.axiom))?;
            ensure(margin > REPLAY_MARGIN, || {
                format!("{} {}: margin {margin:e}", v.rule, v.axiom)
            })?;
            worst = worst.min(margin);
        }
        ensure(!ledger.verdicts.is_empty(), || {
            "no fail verdicts collected".into()
        })?;
        Ok(format!(
            "{} fail verdicts replay, smallest margin {worst:.3e}",
            ledger.verdicts.len()
        ))
    });
    ledger.record(c, t, result);
}

fn main() {
    let mut ledger = Ledger {
        failed: 0,
        verdicts: Vec::new(),
        epochs: Vec::new(),
    };
    criterion_1(&mut ledger);
    criterion_2(&mut ledger);
    criterion_3(&mut ledger);
    criterion_4(&mut ledger);
    criterion_5(&mut ledger);
    criterion_6(&mut ledger);
    criterion_7(&mut ledger);
    criterion_8(&mut ledger);
    criterion_9(&mut ledger);
    criterion_10(&mut ledger);
    println!("{} of 10 criteria failed", ledger.failed);
    if ledger.failed > 0 {
        std::process::exit(1);
    }
}
