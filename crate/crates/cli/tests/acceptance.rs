//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Exits nonzero if any criterion fails other than those listed in
//! `KNOWN_FAILURES`, which still print FAIL with their measured values.

use std::process::{Command, ExitCode};
use std::time::Instant;

use permreg::bounds::{verify_chi2_bound_mc, verify_hprob_mc, verify_lemma7, verify_partition_lemma};
use permreg::estimators::{brute_force_mle, oracle_x_estimator, sort_mle_d1, DEFAULT_MAX_N};
use permreg::experiment::{run_phase_transition, ExperimentConfig};
use permreg::hardness::{feasibility_check, partition_brute_force, reduce_partition, PartitionInstance};
use permreg::model::{delta_statistic, generate_instance, signal_norm_for_gamma, TruePermutation};
use permreg::rng::{derive_seed, rng_from_seed};

/// The fixed-point rate printed for the Hamming-ball sampler does not match
/// the sampling process it describes; the process gives (n - h + 1)/n.
const KNOWN_FAILURES: &[usize] = &[5];

const SEED: u64 = 20_240_601;

type Check = fn() -> Outcome;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn phase_transition() -> Outcome {
    let cfg = ExperimentConfig {
        n_grid: vec![100],
        d: 1,
        gamma_grid: vec![2.0, 3.0, 4.0, 5.0, 6.0],
        trials: 200,
        sigma: 1.0,
        estimator: "sort1d".into(),
        master_seed: SEED,
        ..Default::default()
    };
    let batch = run_phase_transition(&cfg).expect("sweep runs");
    let freqs: Vec<f64> = batch.aggregates.iter().map(|a| a.freq).collect();
    let monotone = freqs.windows(2).all(|w| w[1] >= w[0] - 0.05);
    let passed = freqs[4] >= 0.95 && freqs[0] <= 0.05 && monotone;
    outcome(passed, format!("freq over Γ=2..6: {freqs:?}"))
}

fn sort_equals_brute() -> Outcome {
    let mut objective_mismatch = 0;
    let mut pi_mismatch = 0;
    for n in 2..=7usize {
        for t in 0..100u64 {
            let inst = generate_instance(
                n,
                1,
                &[2.0],
                1.0,
                TruePermutation::Random,
                derive_seed(SEED, &[2, n as u64, t]),
            )
            .unwrap();
            let a: Vec<f64> = inst.design.column(0).iter().copied().collect();
            let s = sort_mle_d1(&inst.y, &a).unwrap();
            let b = brute_force_mle(&inst.y, &inst.design, DEFAULT_MAX_N).unwrap();
            objective_mismatch += usize::from(s.objective != b.objective);
            pi_mismatch += usize::from(s.pi_hat != b.pi_hat);
        }
    }
    outcome(
        objective_mismatch == 0 && pi_mismatch == 0,
        format!("600 instances: {objective_mismatch} objective and {pi_mismatch} permutation mismatches"),
    )
}

fn hardness_equivalence() -> Outcome {
    let mut instances = Vec::new();
    for d in 1..=3u32 {
        for code in 0..5u64.pow(d) {
            let b: Vec<u64> = (0..d).map(|i| code / 5u64.pow(i) % 5 + 1).collect();
            instances.push(b);
        }
    }
    let mut mismatches = 0;
    for b in &instances {
        let inst = PartitionInstance::new(b.clone()).unwrap();
        let f = feasibility_check(&reduce_partition(&inst), 3).unwrap();
        if f.feasible != partition_brute_force(&inst).unwrap().exists {
            mismatches += 1;
        }
    }
    outcome(
        instances.len() == 155 && mismatches == 0,
        format!("{} instances, {mismatches} mismatches", instances.len()),
    )
}

fn chi2_domination() -> Outcome {
    let mut violations = 0;
    for ell in [1usize, 2, 5, 10] {
        let grid: Vec<f64> = (1..=20).map(|k| ell as f64 * k as f64 / 20.0).collect();
        let v = verify_chi2_bound_mc(ell, &grid, 100_000, &mut rng_from_seed(derive_seed(SEED, &[4, ell as u64])))
            .unwrap();
        violations += v.violations;
    }
    outcome(violations == 0, format!("{violations} violations over 80 grid points"))
}

fn hprob() -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    for (n, h) in [(10usize, 2usize), (10, 5)] {
        let c = verify_hprob_mc(n, h, 100_000, &mut rng_from_seed(derive_seed(SEED, &[5, h as u64]))).unwrap();
        passed &= c.matches_stated;
        parts.push(format!(
            "(n={n},h={h}) empirical {:.4} vs target {:.4} (process rate {:.4})",
            c.empirical, c.stated, c.process
        ));
    }
    outcome(passed, parts.join("; "))
}

fn partition_lemma() -> Outcome {
    let c = verify_partition_lemma(1000, 3, 50, &mut rng_from_seed(derive_seed(SEED, &[6]))).unwrap();
    outcome(c.failures == 0, format!("{} derangements, {} failures", c.trials, c.failures))
}

fn lemma7() -> Outcome {
    let c = verify_lemma7(12, 1e-9).unwrap();
    outcome(
        c.eigenvalue_failures == 0 && c.determinant_failures == 0,
        format!(
            "{} cases, max rel err {:.2e}, {} eigenvalue / {} determinant failures",
            c.cases, c.max_relative_error, c.eigenvalue_failures, c.determinant_failures
        ),
    )
}

fn oracle_converse() -> Outcome {
    let n = 100;
    let norm = signal_norm_for_gamma(n, 0.5, 1.0);
    let failures = (0..200u64)
        .filter(|&t| {
            let inst = generate_instance(n, 1, &[norm], 1.0, TruePermutation::Random, derive_seed(SEED, &[8, t]))
                .unwrap();
            oracle_x_estimator(&inst.y, &inst.design, &inst.x_star).unwrap().pi_hat != inst.pi_star
        })
        .count();
    let freq = failures as f64 / 200.0;
    outcome(freq >= 0.90, format!("failure frequency {freq:.3}"))
}

fn residual_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (di, d) in [1usize, 2, 5].into_iter().enumerate() {
        for n in [10usize, 50] {
            for t in 0..17u64 {
                let x: Vec<f64> = (0..d).map(|i| 1.0 + i as f64).collect();
                let seed = derive_seed(SEED, &[9, di as u64, n as u64, t]);
                let inst = generate_instance(n, d, &x, 1.0, TruePermutation::Random, seed).unwrap();
                let s = delta_statistic(&inst, &inst.pi_star).unwrap();
                worst = worst.max(s.residual_identity_error());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-8, format!("{count} instances, max relative error {worst:.2e}"))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_permreg"))
            .args(["simulate", "--n", "60,100", "--gamma-grid", "2,3,4,5,6", "--trials", "100"])
            .args(["--seed", "7", "--workers", workers, "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out).unwrap()
    };
    let single = run("1", "one.csv");
    let multi = run("8", "many.csv");
    outcome(single == multi, format!("{} bytes each, identical: {}", single.len(), single == multi))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("phase transition", phase_transition),
        ("sort equals brute force", sort_equals_brute),
        ("hardness reduction", hardness_equivalence),
        ("chi-square lower tail", chi2_domination),
        ("Hamming-ball fixed-point rate", hprob),
        ("independent partition", partition_lemma),
        ("covariance eigenvalues", lemma7),
        ("oracle failure at low Γ", oracle_converse),
        ("residual identity", residual_identity),
        ("CLI determinism", cli_determinism),
    ];
    let mut unexpected = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag:<12} {name}: {} [{secs:.1}s]", o.detail);
        if !o.passed && !known {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
