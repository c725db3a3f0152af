//! Monte Carlo and numerical checks of the auxiliary lemmas.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::tails::{chi2_lower_tail_bound, covariance_matrix, lemma7_covariance_eigs, projection_tail_bound};
use crate::error::{Error, Result};
use crate::perm::{
    generative_fixed_point_probability, independent_partition, is_independent, sample_hamming_ball_generative,
    sample_uniform, stated_fixed_point_probability, Permutation,
};
use crate::rng::{derive_seed, rng_from_seed};

/// Empirical frequencies may exceed a bound by this many binomial standard errors.
pub const STD_ERROR_SLACK: f64 = 3.0;

const MIN_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    /// Evaluation point (`p` for chi-square, `β` for projections).
    pub point: f64,
    pub empirical: f64,
    pub bound: f64,
    pub std_error: f64,
    pub violated: bool,
}

impl TailCheck {
    fn new(point: f64, hits: usize, samples: usize, bound: f64) -> Self {
        let empirical = hits as f64 / samples as f64;
        let std_error = (empirical * (1.0 - empirical) / samples as f64).sqrt();
        TailCheck {
            point,
            empirical,
            bound,
            std_error,
            violated: empirical > bound + STD_ERROR_SLACK * std_error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chi2Verification {
    pub ell: usize,
    pub samples: usize,
    pub checks: Vec<TailCheck>,
    pub violations: usize,
}

/// Compares the empirical CDF of `samples` chi-square draws with the
/// Chernoff lower-tail bound at each point of `p_grid`.
pub fn verify_chi2_bound_mc<R: Rng + ?Sized>(
    ell: usize,
    p_grid: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<Chi2Verification> {
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let dist = ChiSquared::new(ell as f64).map_err(|e| Error::invalid(e.to_string()))?;
    let mut draws: Vec<f64> = (0..samples).map(|_| dist.sample(rng)).collect();
    draws.sort_by(f64::total_cmp);
    let checks = p_grid
        .iter()
        .map(|&p| {
            let bound = chi2_lower_tail_bound(ell, p)?;
            let hits = draws.partition_point(|&z| z <= p);
            Ok(TailCheck::new(p, hits, samples, bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = checks.iter().filter(|c| c.violated).count();
    Ok(Chi2Verification {
        ell,
        samples,
        checks,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionVerification {
    pub n: usize,
    pub d: usize,
    pub samples: usize,
    pub checks: Vec<TailCheck>,
    pub violations: usize,
}

/// Projecting a fixed vector onto a uniformly random subspace has the same
/// law as projecting a uniformly random direction onto a fixed subspace, so
/// each sample is `||g_{1..d}||² / ||g||²` for a standard Gaussian `g`.
pub fn verify_projection_bound_mc<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    beta_grid: &[f64],
    samples: usize,
    rng: &mut R,
) -> Result<ProjectionVerification> {
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if d == 0 || d >= n {
        return Err(Error::invalid(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    let ratios: Vec<f64> = (0..samples)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let head: f64 = g[..d].iter().map(|v| v * v).sum();
            let total: f64 = head + g[d..].iter().map(|v| v * v).sum::<f64>();
            head / total
        })
        .collect();
    let checks = beta_grid
        .iter()
        .map(|&beta| {
            let bound = projection_tail_bound(n, d, beta)?;
            let level = beta * d as f64 / n as f64;
            let hits = ratios.iter().filter(|&&r| r >= level).count();
            Ok(TailCheck::new(beta, hits, samples, bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = checks.iter().filter(|c| c.violated).count();
    Ok(ProjectionVerification {
        n,
        d,
        samples,
        checks,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HprobCheck {
    pub n: usize,
    pub hbar: usize,
    pub samples: usize,
    /// Pooled frequency of `π(i) = i` over all positions and draws.
    pub empirical: f64,
    /// `(n - h̄)/n + h̄/n²`.
    pub stated: f64,
    /// `(n - h̄ + 1)/n`, the rate the two-step process actually produces.
    pub process: f64,
    pub tolerance: f64,
    pub matches_stated: bool,
    pub matches_process: bool,
}

pub fn verify_hprob_mc<R: Rng + ?Sized>(n: usize, hbar: usize, samples: usize, rng: &mut R) -> Result<HprobCheck> {
    let mut fixed = 0usize;
    for _ in 0..samples {
        let p = sample_hamming_ball_generative(n, hbar, rng)?;
        fixed += p.map().iter().enumerate().filter(|(i, &v)| *i == v).count();
    }
    let empirical = fixed as f64 / (samples * n) as f64;
    let stated = stated_fixed_point_probability(n, hbar);
    let process = generative_fixed_point_probability(n, hbar);
    let tolerance = 0.01;
    Ok(HprobCheck {
        n,
        hbar,
        samples,
        empirical,
        stated,
        process,
        tolerance,
        matches_stated: (empirical - stated).abs() <= tolerance,
        matches_process: (empirical - process).abs() <= tolerance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionLemmaCheck {
    pub trials: usize,
    pub min_k: usize,
    pub max_k: usize,
    pub failures: usize,
}

fn random_derangement<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Permutation> {
    // Roughly a 1/e fraction of uniform permutations are derangements.
    loop {
        let p = sample_uniform(k, rng)?;
        if p.is_derangement() {
            return Ok(p);
        }
    }
}

/// Draws `trials` uniform derangements with `k` uniform in `min_k..=max_k`
/// and checks every part edge-by-edge for independence and size.
pub fn verify_partition_lemma<R: Rng + ?Sized>(
    trials: usize,
    min_k: usize,
    max_k: usize,
    rng: &mut R,
) -> Result<PartitionLemmaCheck> {
    if min_k < 3 || max_k < min_k {
        return Err(Error::invalid(format!("need 3 <= min_k <= max_k, got {min_k}..={max_k}")));
    }
    let mut failures = 0;
    for _ in 0..trials {
        let k = rng.random_range(min_k..=max_k);
        let p = random_derangement(k, rng)?;
        let parts = independent_partition(&p)?.parts.expect("parts are filled");
        let covered: usize = parts.iter().map(Vec::len).sum();
        let ok = covered == k
            && parts.iter().all(|part| part.len() >= k / 3 && is_independent(&p, part));
        if !ok {
            failures += 1;
        }
    }
    Ok(PartitionLemmaCheck {
        trials,
        min_k,
        max_k,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma7Check {
    pub cases: usize,
    /// Largest relative gap between a numerically computed eigenvalue and its closed form.
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub eigenvalue_failures: usize,
    pub determinant_failures: usize,
}

/// Dense symmetric eigensolve of `Ȳ` for every `2 <= h̄ <= n <= max_n`.
pub fn verify_lemma7(max_n: usize, tolerance: f64) -> Result<Lemma7Check> {
    let mut cases = 0;
    let mut max_relative_error: f64 = 0.0;
    let mut eigenvalue_failures = 0;
    let mut determinant_failures = 0;
    for n in 2..=max_n {
        for hbar in 2..=n {
            cases += 1;
            let closed = lemma7_covariance_eigs(n, 1.0, hbar)?;
            let mut numeric: Vec<f64> = covariance_matrix(n, hbar).symmetric_eigen().eigenvalues.iter().copied().collect();
            numeric.sort_by(f64::total_cmp);
            let top = numeric.pop().expect("n >= 2");
            let mut worst = (top - closed.lambda1).abs() / closed.lambda1.abs();
            for v in &numeric {
                worst = worst.max((v - closed.lambda_rest).abs() / closed.lambda_rest.abs());
            }
            max_relative_error = max_relative_error.max(worst);
            if worst > tolerance {
                eigenvalue_failures += 1;
            }
            let det = top * numeric.iter().product::<f64>();
            if det > closed.det_bound_normalized {
                determinant_failures += 1;
            }
        }
    }
    Ok(Lemma7Check {
        cases,
        max_relative_error,
        tolerance,
        eigenvalue_failures,
        determinant_failures,
    })
}

/// Sample counts and seed for [`run_all_verifiers`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifierSettings {
    pub seed: u64,
    pub chi2_samples: usize,
    pub projection_samples: usize,
    pub hprob_samples: usize,
    pub partition_trials: usize,
}

impl Default for VerifierSettings {
    fn default() -> Self {
        VerifierSettings {
            seed: 0,
            chi2_samples: 100_000,
            projection_samples: 100_000,
            hprob_samples: 100_000,
            partition_trials: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub chi2: Vec<Chi2Verification>,
    pub projection: ProjectionVerification,
    pub hprob: Vec<HprobCheck>,
    pub partition: PartitionLemmaCheck,
    pub lemma7: Lemma7Check,
}

impl VerificationSummary {
    /// Names of the checks that failed; empty when everything holds.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.chi2 {
            if c.violations > 0 {
                out.push(format!("chi2 lower tail, ell={}: {} violations", c.ell, c.violations));
            }
        }
        if self.projection.violations > 0 {
            out.push(format!("projection tail: {} violations", self.projection.violations));
        }
        for h in &self.hprob {
            if !h.matches_stated {
                out.push(format!(
                    "fixed-point rate n={} hbar={}: empirical {:.4} vs stated {:.4} (process rate {:.4})",
                    h.n, h.hbar, h.empirical, h.stated, h.process
                ));
            }
        }
        if self.partition.failures > 0 {
            out.push(format!("independent partition: {} failures", self.partition.failures));
        }
        if self.lemma7.eigenvalue_failures + self.lemma7.determinant_failures > 0 {
            out.push(format!(
                "covariance eigenvalues: {} eigenvalue and {} determinant failures",
                self.lemma7.eigenvalue_failures, self.lemma7.determinant_failures
            ));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Twenty evenly spaced points in `(0, ell]`.
pub(crate) fn chi2_grid(ell: usize) -> Vec<f64> {
    (1..=20).map(|k| ell as f64 * k as f64 / 20.0).collect()
}

/// Runs every verifier with independent streams derived from `settings.seed`.
pub fn run_all_verifiers(settings: &VerifierSettings) -> Result<VerificationSummary> {
    let stream = |tag: u64| rng_from_seed(derive_seed(settings.seed, &[tag]));
    let chi2 = [1usize, 2, 5, 10]
        .iter()
        .map(|&ell| verify_chi2_bound_mc(ell, &chi2_grid(ell), settings.chi2_samples, &mut stream(ell as u64)))
        .collect::<Result<Vec<_>>>()?;
    let betas: Vec<f64> = (1..=16).map(|k| 1.0 + 0.25 * k as f64).collect();
    let projection = verify_projection_bound_mc(10, 2, &betas, settings.projection_samples, &mut stream(100))?;
    let hprob = [(10usize, 2usize), (10, 5)]
        .iter()
        .map(|&(n, h)| verify_hprob_mc(n, h, settings.hprob_samples, &mut stream(200 + h as u64)))
        .collect::<Result<Vec<_>>>()?;
    let partition = verify_partition_lemma(settings.partition_trials, 3, 50, &mut stream(300))?;
    let lemma7 = verify_lemma7(12, 1e-9)?;
    Ok(VerificationSummary {
        chi2,
        projection,
        hprob,
        partition,
        lemma7,
    })
}
