use reward_axioms::amount::Ratio;
use reward_axioms::axioms::{check_sybil_proofness, replay, violation_at, MARGIN_THRESHOLD};
use reward_axioms::matrix::axiom_matrix;
use reward_axioms::search::{verify_deterministic, verify_risk_averse, verify_risk_seeking};
use reward_axioms::utility::default_test_set;
use reward_axioms::{
    catalog, check, AllocationRule, Axiom, CheckOptions, Configuration, SharingFamily, Universe,
    UtilityFunction, Witness,
};

fn power(n: i128, d: i128) -> UtilityFunction {
    UtilityFunction::power(Ratio::new(n, d)).unwrap()
}

#[test]
fn catalog_matrix_matches_claims() {
    let u = Universe::new(4, 8).unwrap();
    let m = axiom_matrix(&catalog(), &u, &CheckOptions::risk_neutral()).unwrap();
    let d: Vec<_> = m.discrepancies().collect();
    assert!(d.is_empty(), "{d:?}");
    assert!(m.grade_order_holds());
    for row in &m.rows {
        for v in &row.verdicts {
            if let Some(w) = v.witness() {
                let json = serde_json::to_string(w).unwrap();
                let back: Witness = serde_json::from_str(&json).unwrap();
                let rule: AllocationRule = row.rule.parse().unwrap();
                let margin = replay(&rule, v.axiom, &back).unwrap();
                assert!(
                    margin > MARGIN_THRESHOLD,
                    "{} {} margin {margin}",
                    row.rule,
                    v.axiom
                );
            }
        }
    }
}

#[test]
fn first_witnesses_in_small_universes() {
    // In (1,2) the majority miner takes 2/3 and the other nothing. Merged at rate 3
    // and shared proportionally they get 1/3 and 2/3.
    let u = Universe::new(3, 3).unwrap();
    let v = check(
        &AllocationRule::half_threshold(),
        &u,
        Axiom::A4b,
        &CheckOptions::risk_neutral(),
    )
    .unwrap();
    match v.witness() {
        Some(Witness::Collusion { merge, .. }) => {
            assert_eq!(merge.base.rates(), &[1, 2]);
            assert_eq!(merge.merged_rate, 3);
        }
        other => panic!("unexpected {other:?}"),
    }
    let sq = check_sybil_proofness(
        &AllocationRule::square_roots(),
        &Universe::new(2, 5).unwrap(),
    )
    .unwrap();
    assert!(!sq.passed());
}

#[test]
fn square_roots_four_one_split() {
    // sqrt(4)/(sqrt(4)+1) = 2/3 before; two sybils of 2 get 2·sqrt2/(2·sqrt2+1) after.
    let h = Configuration::new(vec![4, 1]).unwrap();
    let w = violation_at(
        &AllocationRule::square_roots(),
        &h,
        Axiom::A3,
        &CheckOptions::risk_neutral(),
    )
    .unwrap()
    .expect("split of the large miner helps");
    let margin = replay(&AllocationRule::square_roots(), Axiom::A3, &w).unwrap();
    assert!(margin > 0.0);
}

#[test]
fn concave_utilities_break_every_rule() {
    let u = Universe::new(3, 4).unwrap();
    let rules: Vec<AllocationRule> = catalog().into_iter().map(|e| e.rule).collect();
    for util in [power(1, 2), power(9, 10)] {
        let report = verify_risk_averse(&u, &rules, &util).unwrap();
        assert!(report.holds(), "{report:?}");
        let prop = &report.entries[0];
        assert_eq!(prop.two_way, Some(true));
        let v = prop.violation.as_ref().unwrap();
        assert_eq!(v.axiom, Axiom::A4c);
        match v.witness().unwrap() {
            Witness::Collusion { merge, members, .. } => {
                assert_eq!(merge.base.rates(), &[1, 1]);
                assert_eq!(merge.merged_rate, 2);
                // Before: win the whole reward with probability 1/2. After: half
                // the reward for certain.
                let after = 0.5f64.powf(util_alpha(&util));
                for m in members {
                    assert!((m.before.to_f64() - 0.5).abs() < 1e-12);
                    assert!((m.after.to_f64() - after).abs() < 1e-12);
                }
            }
            w => panic!("unexpected {w:?}"),
        }
    }
}

fn util_alpha(u: &UtilityFunction) -> f64 {
    u.to_string()
        .trim_start_matches("power:")
        .parse::<f64>()
        .unwrap_or_else(|_| {
            let s = u.to_string();
            let (n, d) = s.trim_start_matches("power:").split_once('/').unwrap();
            n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
        })
}

#[test]
fn convex_utilities_keep_proportional_collusion_proof() {
    let u = Universe::new(3, 5).unwrap();
    let report = verify_risk_seeking(
        &u,
        &[power(11, 10), power(2, 1), power(1, 2)],
        SharingFamily::default(),
    )
    .unwrap();
    assert!(report.holds());
    assert!(report.entries[0].verdict.passed());
    assert!(report.entries[1].verdict.passed());
    assert!(!report.entries[2].verdict.passed());
}

#[test]
fn deterministic_payouts_follow_risk_neutral_verdicts() {
    let u = Universe::new(3, 5).unwrap();
    let entries =
        verify_deterministic(&u, &AllocationRule::proportional(), &default_test_set()).unwrap();
    assert!(entries
        .iter()
        .all(|e| e.agrees() && e.deterministic.passed()));
}
