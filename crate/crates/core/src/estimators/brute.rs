use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{EstimationInput, EstimationResult, Estimator};
use crate::error::{Error, Result};
use crate::model::ProjectionKernel;
use crate::perm::{next_permutation, Permutation};
use crate::rng::Rng;

/// 10! ≈ 3.6M residual evaluations.
pub const DEFAULT_MAX_N: usize = 10;

/// Best `(objective, map)` over one shard of the enumeration.
type Candidate = (f64, Vec<usize>);

fn better(a: Candidate, b: Candidate) -> Candidate {
    match a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)) {
        std::cmp::Ordering::Greater => b,
        _ => a,
    }
}

/// Scans every permutation whose first entry is `first`, in lexicographic order.
fn scan_shard(kernel: &ProjectionKernel, y: &[f64], first: usize) -> Candidate {
    let n = y.len();
    let mut map: Vec<usize> = std::iter::once(first).chain((0..n).filter(|&v| v != first)).collect();
    let mut shuffled = vec![0.0; n];
    let mut best: Option<Candidate> = None;
    loop {
        // ||P⊥_{ΠA} y||² = ||P⊥_A Πᵀ y||², so one factorization of A serves all Π.
        for (i, &j) in map.iter().enumerate() {
            shuffled[j] = y[i];
        }
        let obj = kernel.residual(&shuffled);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, map.clone()));
        }
        if !next_permutation(&mut map[1..]) {
            break;
        }
    }
    best.expect("every shard holds at least one permutation")
}

/// Exhaustive maximum-likelihood permutation for `n <= max_n`.
///
/// Ties on the objective resolve to the lexicographically smallest map, so
/// the parallel and serial scans pick the same permutation.
pub fn brute_force_mle(y: &[f64], design: &DMatrix<f64>, max_n: usize) -> Result<EstimationResult> {
    let n = design.nrows();
    let input = EstimationInput::new(y, design);
    input.check()?;
    if n > max_n {
        return Err(Error::Refused(format!(
            "exhaustive search over {n}! permutations exceeds the limit n <= {max_n}"
        )));
    }
    let kernel = ProjectionKernel::new(design)?;
    let (_, map) = (0..n)
        .into_par_iter()
        .map(|first| scan_shard(&kernel, y, first))
        .reduce_with(better)
        .ok_or_else(|| Error::invalid("empty observation"))?;
    EstimationResult::finalize("brute", &input, Permutation::from_map_unchecked(map), true)
}

#[derive(Clone, Copy, Debug)]
pub struct BruteForce {
    pub max_n: usize,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce {
            max_n: DEFAULT_MAX_N,
        }
    }
}

impl Estimator for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn check_dimensions(&self, n: usize, _d: usize) -> Result<()> {
        if n > self.max_n {
            return Err(Error::Config(format!(
                "brute force requires n <= {}, got n = {n}",
                self.max_n
            )));
        }
        Ok(())
    }

    fn estimate(&self, input: &EstimationInput, _rng: &mut Rng) -> Result<EstimationResult> {
        brute_force_mle(input.y, input.design, self.max_n)
    }
}
