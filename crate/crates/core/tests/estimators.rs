use permreg::estimators::{alternating_min, brute_force_mle, oracle_x_estimator, sort_mle_d1, DEFAULT_MAX_N};
use permreg::model::{generate_instance, signal_norm_for_gamma, TruePermutation};
use permreg::perm::hamming_distance;
use permreg::rng::{derive_seed, rng_from_seed};
use permreg::{EstimationInput, EstimatorRegistry, Error};

#[test]
fn sort_and_brute_agree_on_noisy_instances() {
    for n in 2..=6 {
        for t in 0..30u64 {
            let inst = generate_instance(n, 1, &[1.5], 0.5, TruePermutation::Random, derive_seed(7, &[n as u64, t]))
                .unwrap();
            let a = inst.design.column(0).iter().copied().collect::<Vec<_>>();
            let s = sort_mle_d1(&inst.y, &a).unwrap();
            let b = brute_force_mle(&inst.y, &inst.design, DEFAULT_MAX_N).unwrap();
            assert_eq!(s.objective, b.objective, "n={n} t={t}");
            assert_eq!(s.pi_hat, b.pi_hat, "n={n} t={t}");
        }
    }
}

#[test]
fn brute_force_is_a_lower_bound_for_heuristics() {
    for t in 0..10u64 {
        let inst = generate_instance(7, 2, &[2.0, -1.0], 0.3, TruePermutation::Random, t).unwrap();
        let brute = brute_force_mle(&inst.y, &inst.design, DEFAULT_MAX_N).unwrap();
        let alt = alternating_min(&inst.y, &inst.design, 5, 50, &mut rng_from_seed(t)).unwrap();
        let oracle = oracle_x_estimator(&inst.y, &inst.design, &inst.x_star).unwrap();
        assert!(brute.objective <= alt.objective + 1e-12);
        assert!(brute.objective <= oracle.objective + 1e-12);
        assert!(brute.exact && !alt.exact && !oracle.exact);
    }
}

#[test]
fn noiseless_high_snr_recovers_truth() {
    let registry = EstimatorRegistry::with_builtins();
    for name in ["sort1d", "brute", "oracle"] {
        let est = registry.get(name).unwrap();
        for t in 0..10u64 {
            let inst = generate_instance(8, 1, &[3.0], 0.0, TruePermutation::Random, 100 + t).unwrap();
            let input = EstimationInput::from_instance(&inst);
            let out = est.estimate(&input, &mut rng_from_seed(t)).unwrap();
            assert_eq!(hamming_distance(&out.pi_hat, &inst.pi_star).unwrap(), 0, "{name}");
        }
    }
}

#[test]
fn registry_dispatch_matches_direct_calls() {
    let registry = EstimatorRegistry::with_builtins();
    assert_eq!(registry.names(), vec!["altmin", "brute", "oracle", "sort1d"]);
    let inst = generate_instance(6, 1, &[2.0], 1.0, TruePermutation::Random, 3).unwrap();
    let input = EstimationInput::from_instance(&inst);
    let via = registry.get("brute").unwrap().estimate(&input, &mut rng_from_seed(0)).unwrap();
    let direct = brute_force_mle(&inst.y, &inst.design, DEFAULT_MAX_N).unwrap();
    assert_eq!(via, direct);
    assert!(matches!(registry.get("nope"), Err(Error::Config(_))));
}

#[test]
fn oracle_needs_the_signal() {
    let registry = EstimatorRegistry::with_builtins();
    let inst = generate_instance(5, 1, &[1.0], 1.0, TruePermutation::Random, 1).unwrap();
    let input = EstimationInput::new(&inst.y, &inst.design);
    assert!(registry.get("oracle").unwrap().estimate(&input, &mut rng_from_seed(0)).is_err());
}

#[test]
fn oracle_fails_at_low_gamma() {
    let n = 60;
    let norm = signal_norm_for_gamma(n, 0.5, 1.0);
    let failures = (0..50u64)
        .filter(|&t| {
            let inst = generate_instance(n, 1, &[norm], 1.0, TruePermutation::Random, t).unwrap();
            let out = oracle_x_estimator(&inst.y, &inst.design, &inst.x_star).unwrap();
            out.pi_hat != inst.pi_star
        })
        .count();
    assert!(failures >= 45);
}
