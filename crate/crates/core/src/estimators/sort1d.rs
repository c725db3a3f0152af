use nalgebra::DMatrix;

use super::rank::rank_match;
use super::{EstimationInput, EstimationResult, Estimator};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Exact maximum-likelihood permutation for `d = 1` in `O(n log n)`.
///
/// Minimizing `||P⊥_Π y||²` over `Π` is the same as maximizing
/// `|a_Πᵀ y|`. For a fixed sign the maximizer pairs the sorted entries of
/// `±a` with the sorted entries of `y`, so two sorts suffice: one for `a`
/// (positive coefficient) and one for `-a` (negative coefficient). An exact
/// tie between the two candidates resolves to the `+a` candidate.
pub fn sort_mle_d1(y: &[f64], a: &[f64]) -> Result<EstimationResult> {
    if y.len() != a.len() {
        return Err(Error::invalid(format!(
            "y has {} entries, a has {}",
            y.len(),
            a.len()
        )));
    }
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateDesign(
            "a is identically zero; every permutation has the same objective".into(),
        ));
    }
    let negated: Vec<f64> = a.iter().map(|v| -v).collect();
    let positive = rank_match(y, a);
    let negative = rank_match(y, &negated);

    let correlation = |p: &crate::perm::Permutation| -> f64 {
        p.map().iter().zip(y).map(|(&j, yi)| a[j] * yi).sum::<f64>().abs()
    };
    let pi_hat = if correlation(&negative) > correlation(&positive) {
        negative
    } else {
        positive
    };

    let design = DMatrix::from_column_slice(a.len(), 1, a);
    EstimationResult::finalize("sort1d", &EstimationInput::new(y, &design), pi_hat, true)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SortMle;

impl Estimator for SortMle {
    fn name(&self) -> &'static str {
        "sort1d"
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn check_dimensions(&self, _n: usize, d: usize) -> Result<()> {
        if d != 1 {
            return Err(Error::Config(format!("sort1d requires d = 1, got d = {d}")));
        }
        Ok(())
    }

    fn estimate(&self, input: &EstimationInput, _rng: &mut Rng) -> Result<EstimationResult> {
        input.check()?;
        self.check_dimensions(input.design.nrows(), input.design.ncols())
            .map_err(|_| Error::invalid("sort1d requires a single design column"))?;
        sort_mle_d1(input.y, input.design.column(0).as_slice())
    }
}
