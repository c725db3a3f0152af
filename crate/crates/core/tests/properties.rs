use proptest::prelude::*;

use permreg::bounds::{chi2_lower_tail_bound, thm1_sufficient, thm2_converse};
use permreg::experiment::{csv_string, emit_csv, run_phase_transition, ExperimentConfig, CSV_HEADER};
use permreg::hardness::{feasibility_check, partition_brute_force, reduce_partition, PartitionInstance};
use permreg::model::{delta_statistic, generate_instance, projection_residual, TruePermutation};
use permreg::perm::{hamming_distance, independent_partition, is_independent, sample_uniform};
use permreg::rng::rng_from_seed;
use permreg::Permutation;

fn perm_strategy(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n, any::<u64>()).prop_map(|(n, seed)| sample_uniform(n, &mut rng_from_seed(seed)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_with_inverse_is_identity(p in perm_strategy(30)) {
        let v: Vec<usize> = (0..p.len()).collect();
        prop_assert_eq!(p.apply_inverse(&p.apply(&v)), v.clone());
        prop_assert!(p.inverse().inverse() == p);
        prop_assert_eq!(hamming_distance(&p, &p.inverse().inverse()).unwrap(), 0);
    }

    #[test]
    fn partition_parts_are_independent(seed in any::<u64>(), n in 3usize..40) {
        let mut rng = rng_from_seed(seed);
        let p = loop {
            let p = sample_uniform(n, &mut rng).unwrap();
            if p.is_derangement() {
                break p;
            }
        };
        let parts = independent_partition(&p).unwrap().parts.unwrap();
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for part in &parts {
            prop_assert!(is_independent(&p, part));
            prop_assert!(part.len() >= n / 3);
        }
    }

    #[test]
    fn residual_scales_quadratically(seed in any::<u64>(), c in 0.1f64..10.0) {
        let inst = generate_instance(8, 2, &[1.0, -2.0], 1.0, TruePermutation::Random, seed).unwrap();
        let scaled: Vec<f64> = inst.y.iter().map(|v| v * c).collect();
        let p = sample_uniform(8, &mut rng_from_seed(seed ^ 1)).unwrap();
        let r = projection_residual(&inst.y, &inst.design, &p).unwrap();
        let rs = projection_residual(&scaled, &inst.design, &p).unwrap();
        prop_assert!((rs - c * c * r).abs() <= 1e-9 * (1.0 + rs));
    }

    #[test]
    fn residual_identity_holds(seed in any::<u64>(), d in 1usize..4) {
        let x = vec![1.0; d];
        let inst = generate_instance(20, d, &x, 0.7, TruePermutation::Random, seed).unwrap();
        let stats = delta_statistic(&inst, &inst.pi_star).unwrap();
        prop_assert!(stats.residual_identity_error() <= 1e-8);
        prop_assert_eq!(stats.delta, 0.0);
    }

    #[test]
    fn chi2_bound_is_monotone_in_p(ell in 1usize..20, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let f = |t: f64| chi2_lower_tail_bound(ell, t * ell as f64).unwrap();
        prop_assert!(f(lo) <= f(hi) + 1e-15);
        prop_assert!(f(hi) <= 1.0 + 1e-12);
    }

    #[test]
    fn bounds_are_monotone_in_snr(n in 3usize..500, s in 0.0f64..1e6, k in 1.0f64..100.0) {
        let t1 = thm1_sufficient(n, 1, s, 0.5, 1.0).unwrap();
        let t1b = thm1_sufficient(n, 1, s * k, 0.5, 1.0).unwrap();
        prop_assert!(!t1.satisfied || t1b.satisfied);
        let t2 = thm2_converse(n, s * k, 0.5).unwrap();
        let t2b = thm2_converse(n, s, 0.5).unwrap();
        prop_assert!(!t2.satisfied || t2b.satisfied);
    }

    #[test]
    fn reduction_matches_subset_search(b in prop::collection::vec(1u64..9, 1..=3)) {
        let inst = PartitionInstance::new(b).unwrap();
        let f = feasibility_check(&reduce_partition(&inst), 3).unwrap();
        prop_assert_eq!(f.feasible, partition_brute_force(&inst).unwrap().exists);
        prop_assert_eq!(f.criterion_disagreements, 0);
    }
}

#[test]
fn empty_grid_gives_header_only() {
    let cfg = ExperimentConfig {
        n_grid: vec![],
        ..Default::default()
    };
    let batch = run_phase_transition(&cfg).unwrap();
    assert_eq!(csv_string(&batch), format!("{CSV_HEADER}\n"));
}

#[test]
fn rerunning_gives_identical_bytes() {
    let cfg = ExperimentConfig {
        n_grid: vec![15, 25],
        gamma_grid: vec![2.0, 4.0],
        trials: 10,
        master_seed: 99,
        ..Default::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_csv(&run_phase_transition(&cfg).unwrap(), &a).unwrap();
    emit_csv(&run_phase_transition(&cfg).unwrap(), &b).unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes.iter().filter(|&&c| c == b'\n').count(), 5);
}

#[test]
fn instance_json_round_trips_exactly() {
    let inst = generate_instance(9, 3, &[0.1, 0.2, 0.3], 0.9, TruePermutation::Random, 5).unwrap();
    let back = permreg::ProblemInstance::from_json(&inst.to_json().unwrap()).unwrap();
    assert_eq!(inst, back);
}
