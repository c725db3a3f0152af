use nalgebra::{DMatrix, DVector};

use super::rank::rank_match;
use super::{EstimationInput, EstimationResult, Estimator};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// `argmin_Π ||y - Π A x*||²` when `x*` is known: a one-dimensional
/// assignment solved by matching ranks of `y` and `A x*`.
pub fn oracle_x_estimator(y: &[f64], design: &DMatrix<f64>, x_star: &[f64]) -> Result<EstimationResult> {
    let input = EstimationInput::new(y, design).with_x_star(x_star);
    input.check()?;
    if x_star.len() != design.ncols() {
        return Err(Error::invalid(format!(
            "x_star has {} entries, design has {} columns",
            x_star.len(),
            design.ncols()
        )));
    }
    let signal = design * DVector::from_column_slice(x_star);
    let pi_hat = rank_match(y, signal.as_slice());
    // Exact for the assignment with x* fixed, not for the joint likelihood.
    EstimationResult::finalize("oracle", &input, pi_hat, false)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct OracleX;

impl Estimator for OracleX {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn check_dimensions(&self, _n: usize, _d: usize) -> Result<()> {
        Ok(())
    }

    fn needs_x_star(&self) -> bool {
        true
    }

    fn estimate(&self, input: &EstimationInput, _rng: &mut Rng) -> Result<EstimationResult> {
        let x_star = input
            .x_star
            .ok_or_else(|| Error::invalid("the oracle estimator needs x_star"))?;
        oracle_x_estimator(input.y, input.design, x_star)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_instance, TruePermutation};
    use crate::perm::Permutation;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn assignment_cost(y: &[f64], b: &[f64], p: &Permutation) -> f64 {
        p.apply(b).iter().zip(y).map(|(bi, yi)| (yi - bi).powi(2)).sum()
    }

    #[test]
    fn noiseless_recovers_truth() {
        let inst = generate_instance(40, 3, &[1.0, 2.0, -1.0], 0.0, TruePermutation::Random, 12).unwrap();
        let r = oracle_x_estimator(&inst.y, &inst.design, &inst.x_star).unwrap();
        assert_eq!(r.pi_hat, inst.pi_star);
    }

    #[test]
    fn two_point_hand_example() {
        // Ax* = (0, 1), y = (0.9, 0.1): identity costs 0.81 + 0.81, swap costs 0.01 + 0.01.
        let a = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let r = oracle_x_estimator(&[0.9, 0.1], &a, &[1.0]).unwrap();
        assert_eq!(r.pi_hat, Permutation::transposition(2, 0, 1).unwrap());
    }

    #[test]
    fn matches_two_point_brute_force() {
        let mut rng = rng_from_seed(41);
        let id = Permutation::identity(2);
        let swap = Permutation::transposition(2, 0, 1).unwrap();
        for _ in 0..1000 {
            let b: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = DMatrix::from_column_slice(2, 1, &b);
            let r = oracle_x_estimator(&y, &a, &[1.0]).unwrap();
            let best = assignment_cost(&y, &b, &id).min(assignment_cost(&y, &b, &swap));
            assert_eq!(assignment_cost(&y, &b, &r.pi_hat), best);
        }
    }

    #[test]
    fn size_mismatch() {
        let a = DMatrix::from_element(3, 2, 1.0);
        assert!(oracle_x_estimator(&[0.0; 3], &a, &[1.0]).is_err());
        assert!(oracle_x_estimator(&[0.0; 2], &a, &[1.0, 1.0]).is_err());
    }
}
