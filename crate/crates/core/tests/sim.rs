use reward_axioms::sim::{
    estimate_error_curve, expected_inverse_events, predicted_share_rmse, run_outcomes,
    run_simulation, variance_study, ProtocolParams,
};
use reward_axioms::{AllocationRule, Configuration, Ratio, ScalingFunction, Semantics};

fn cfg(r: &[u64]) -> Configuration {
    Configuration::new(r.to_vec()).unwrap()
}

/// `E[M'^-power]` for geometric `M'` with success probability `1/m`, by series.
fn inverse_moment(m: u64, power: i32) -> f64 {
    let q = 1.0 / m as f64;
    let mut sum = 0.0;
    let mut surv = 1.0;
    let mut k = 1.0f64;
    while surv > 1e-18 {
        sum += q * surv / k.powi(power);
        surv *= 1.0 - q;
        k += 1.0;
    }
    sum
}

fn inverse_events_series(m: u64) -> f64 {
    inverse_moment(m, 1)
}

/// Checks a mean squared share error over `epochs` against the
/// binomial-given-M' oracle, allowing four standard errors. The fourth
/// moment uses the normal approximation `3σ⁴`.
fn assert_mse_near(observed_rmse: f64, share: f64, m: u64, epochs: u64, what: &str) {
    let pq = share * (1.0 - share);
    let mean = pq * inverse_moment(m, 1);
    let second = 3.0 * pq * pq * inverse_moment(m, 2);
    let se = ((second - mean * mean) / epochs as f64).sqrt();
    let observed = observed_rmse * observed_rmse;
    assert!(
        (observed - mean).abs() < 4.0 * se,
        "{what}: mse {observed} vs {mean} ± {se}"
    );
}

#[test]
fn inverse_event_closed_form() {
    for m in [1, 2, 16, 1024, 4096] {
        let a = expected_inverse_events(m);
        let b = inverse_events_series(m);
        assert!((a - b).abs() < 1e-12 * b.max(1.0), "M={m}: {a} vs {b}");
    }
}

#[test]
fn estimation_error_matches_geometric_epoch_length() {
    let h = cfg(&[5, 3, 2]);
    let p = ProtocolParams::new(1024, 1, 11).unwrap();
    let stats = run_simulation(&h, &p, &AllocationRule::proportional(), 2000).unwrap();
    assert_eq!(stats.identity_violations, 0);
    for (i, share) in [0.5, 0.3, 0.2].into_iter().enumerate() {
        assert_mse_near(stats.share_rmse[i], share, 1024, 2000, "share");
        assert!(
            (predicted_share_rmse(share, 1024).powi(2)
                - share * (1.0 - share) * inverse_events_series(1024))
            .abs()
                < 1e-15
        );
        assert!((stats.mean_reward[i] - share).abs() < 0.03);
    }
    // Mean epoch length is M.
    assert!((stats.mean_m_prime - 1024.0).abs() < 5.0 * 1024.0 / (2000f64).sqrt());
}

#[test]
fn attribution_is_unbiased() {
    let h = cfg(&[9, 1]);
    let p = ProtocolParams::new(64, 1, 3).unwrap();
    let stats = run_simulation(&h, &p, &AllocationRule::all_zero(), 2000).unwrap();
    let n: u64 = stats.total_partials.iter().sum();
    let frac = stats.total_partials[0] as f64 / n as f64;
    let sigma = (0.9f64 * 0.1 / n as f64).sqrt();
    assert!((frac - 0.9).abs() < 3.0 * sigma, "{frac}");
}

#[test]
fn scaled_proportional_uses_estimated_total() {
    let h = cfg(&[1, 1]);
    let p = ProtocolParams::new(1024, 1, 7).unwrap();
    let half = AllocationRule::generalized(ScalingFunction::constant(Ratio::new(1, 2)).unwrap());
    let s = run_simulation(&h, &p, &half, 2000).unwrap();
    for m in &s.mean_reward {
        assert!((m - 0.25).abs() < 0.03, "{m}");
    }
    // c read at ρM = 1024 < 2048: low branch.
    let step = AllocationRule::generalized(
        ScalingFunction::step(2048, Ratio::new(1, 4), Ratio::from_integer(1)).unwrap(),
    )
    .with_semantics(Semantics::Deterministic);
    let s = run_simulation(&h, &p, &step, 200).unwrap();
    assert!((s.mean_reward.iter().sum::<f64>() - 0.25).abs() < 1e-12);
}

#[test]
fn deterministic_variance_tracks_share_error() {
    let h = cfg(&[1, 1]);
    let p = ProtocolParams::new(1024, 1, 5).unwrap();
    let report = variance_study(&h, &p, 5000).unwrap();
    for i in 0..2 {
        let r = report.randomized.reward_variance[i];
        assert!((r - 0.25).abs() < 0.01, "{r}");
        let d = report.deterministic.reward_variance[i];
        assert_mse_near(d.sqrt(), 0.5, 1024, 5000, "deterministic variance");
        assert!(d <= r / 100.0);
        assert!((report.randomized.leader_frequency[i] - 0.5).abs() < 0.03);
    }
    assert_eq!(
        report.randomized.leader_frequency,
        report.deterministic.leader_frequency
    );
}

#[test]
fn ratio_one_semantics_coincide() {
    let h = cfg(&[1, 1]);
    let p = ProtocolParams::new(1, 1, 5).unwrap();
    let report = variance_study(&h, &p, 500).unwrap();
    assert_eq!(report.identical_epochs, 500);
    assert_eq!(report.equal_variance_epochs, 500);
    assert_eq!(
        report.randomized.reward_variance,
        report.deterministic.reward_variance
    );
}

#[test]
fn error_curve_decreases() {
    for rates in [&[1u64, 1][..], &[9, 1]] {
        let curve = estimate_error_curve(&cfg(rates), &[64, 256, 1024, 4096], 1, 13, 1500).unwrap();
        assert!(curve[3].share_rmse < curve[0].share_rmse);
        for pt in &curve {
            let p = rates[0] as f64 / rates.iter().sum::<u64>() as f64;
            assert_mse_near(pt.share_rmse, p, pt.m, 1500, "curve");
        }
    }
}

#[test]
fn outcomes_are_seed_determined() {
    let h = cfg(&[2, 1, 1]);
    let p = ProtocolParams::new(32, 2, 99).unwrap();
    let rule = AllocationRule::proportional();
    assert_eq!(
        run_outcomes(&h, &p, &rule, 50).unwrap(),
        run_outcomes(&h, &p, &rule, 50).unwrap()
    );
    let other = ProtocolParams::new(32, 2, 100).unwrap();
    assert_ne!(
        run_outcomes(&h, &p, &rule, 50).unwrap(),
        run_outcomes(&h, &other, &rule, 50).unwrap()
    );
}

#[test]
fn criterion_bound_versus_prediction() {
    // 2·sqrt(p(1-p)/M) assumes M' = M; geometric epochs inflate the mean of 1/M'.
    let m = 1024;
    assert!(expected_inverse_events(m) > 4.0 / m as f64);
}
