use nalgebra::{DMatrix, DVector};

use super::rank::rank_match;
use super::{EstimationInput, EstimationResult, Estimator};
use crate::error::Result;
use crate::model::ProjectionKernel;
use crate::perm::{sample_uniform, Permutation};
use crate::rng::Rng;

/// One alternating-minimization run from a given start.
#[derive(Clone, Debug)]
pub struct AltMinRun {
    pub pi: Permutation,
    /// `||P⊥_Π y||²` after each least-squares step, starting with the initial `Π`.
    pub objectives: Vec<f64>,
    pub iterations: usize,
}

impl AltMinRun {
    pub fn objective(&self) -> f64 {
        *self.objectives.last().expect("a run records at least one objective")
    }
}

/// Alternates `x ← argmin_x ||y - Π A x||²` and `Π ← argmin_Π ||y - Π A x||²`
/// until `Π` repeats or `max_iters` permutation updates have been made.
/// Each half-step is an exact minimization, so the objective never increases.
pub fn alternating_min_trace(
    y: &[f64],
    kernel: &ProjectionKernel,
    design: &DMatrix<f64>,
    start: Permutation,
    max_iters: usize,
) -> AltMinRun {
    let mut pi = start;
    let mut objectives = Vec::new();
    let mut iterations = 0;
    loop {
        let (x, obj) = kernel.fit(&pi.apply_inverse(y));
        objectives.push(obj);
        if iterations == max_iters {
            break;
        }
        let signal = design * DVector::from_column_slice(&x);
        let next = rank_match(y, signal.as_slice());
        if next == pi {
            break;
        }
        pi = next;
        iterations += 1;
    }
    AltMinRun {
        pi,
        objectives,
        iterations,
    }
}

/// Best of `restarts` alternating-minimization runs: the first starts at
/// the identity, the rest at uniform random permutations. Not guaranteed
/// to find the maximum-likelihood permutation.
pub fn alternating_min(
    y: &[f64],
    design: &DMatrix<f64>,
    restarts: usize,
    max_iters: usize,
    rng: &mut Rng,
) -> Result<EstimationResult> {
    let input = EstimationInput::new(y, design);
    input.check()?;
    let kernel = ProjectionKernel::new(design)?;
    let n = design.nrows();
    let mut best: Option<AltMinRun> = None;
    for r in 0..restarts.max(1) {
        let start = if r == 0 {
            Permutation::identity(n)
        } else {
            sample_uniform(n, rng)?
        };
        let run = alternating_min_trace(y, &kernel, design, start, max_iters);
        let improves = best.as_ref().is_none_or(|b| {
            run.objective()
                .total_cmp(&b.objective())
                .then_with(|| run.pi.cmp(&b.pi))
                .is_lt()
        });
        if improves {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let iterations = best.iterations;
    let mut result = EstimationResult::finalize("altmin", &input, best.pi, false)?;
    result.iterations = Some(iterations);
    Ok(result)
}

#[derive(Clone, Copy, Debug)]
pub struct AlternatingMin {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for AlternatingMin {
    fn default() -> Self {
        AlternatingMin {
            restarts: 10,
            max_iters: 100,
        }
    }
}

impl Estimator for AlternatingMin {
    fn name(&self) -> &'static str {
        "altmin"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn check_dimensions(&self, _n: usize, _d: usize) -> Result<()> {
        Ok(())
    }

    fn estimate(&self, input: &EstimationInput, rng: &mut Rng) -> Result<EstimationResult> {
        alternating_min(input.y, input.design, self.restarts, self.max_iters, rng)
    }
}
