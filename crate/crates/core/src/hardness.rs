//! Reduction from PARTITION to deciding whether `y_π = A x` has a solution.
//!
//! Given integers `b_1..b_d`, set `y = (b_1, .., b_d, 0, .., 0)` of length
//! `2d + 1` and let `A` stack `I_{2d}` over the row `(1_d, -1_d)`. The first
//! `2d` rows force `x = (y_π[0], .., y_π[2d-1])`, leaving one equation: the
//! entries of `y_π` in the first `d` positions must sum to the entries in
//! the remaining `d + 1` positions. That is solvable for some `π` exactly
//! when the `b_i` split into two halves of equal sum.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProjectionKernel;
use crate::perm::{next_permutation, Permutation};

/// Largest `d` for which [`feasibility_check`] enumerates `(2d+1)!` permutations by default.
pub const DEFAULT_MAX_D: usize = 3;

/// Largest `d` accepted by [`partition_brute_force`].
pub const MAX_SUBSET_D: usize = 20;

/// Solvability threshold on `||y_π - A x||` for the integer systems built here.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionInstance {
    b: Vec<u64>,
}

impl PartitionInstance {
    pub fn new(b: Vec<u64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("PARTITION instance needs at least one integer"));
        }
        if b.contains(&0) {
            return Err(Error::invalid("PARTITION entries must be positive"));
        }
        Ok(PartitionInstance { b })
    }

    pub fn values(&self) -> &[u64] {
        &self.b
    }

    pub fn d(&self) -> usize {
        self.b.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionOutput {
    pub y: Vec<i64>,
    /// Row-major `(2d+1) x 2d` integer matrix.
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
}

impl ReductionOutput {
    /// The `d` of the PARTITION instance this came from.
    pub fn d(&self) -> usize {
        self.a.first().map_or(0, |row| row.len() / 2)
    }

    pub fn design(&self) -> DMatrix<f64> {
        let rows = self.a.len();
        let cols = self.a.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, cols, |i, j| self.a[i][j] as f64)
    }

    pub fn y_f64(&self) -> Vec<f64> {
        self.y.iter().map(|&v| v as f64).collect()
    }
}

pub fn reduce_partition(inst: &PartitionInstance) -> ReductionOutput {
    let d = inst.d();
    let mut y: Vec<i64> = inst.b.iter().map(|&v| v as i64).collect();
    y.resize(2 * d + 1, 0);
    let mut a: Vec<Vec<i64>> = (0..2 * d)
        .map(|i| (0..2 * d).map(|j| i64::from(i == j)).collect())
        .collect();
    a.push((0..2 * d).map(|j| if j < d { 1 } else { -1 }).collect());
    ReductionOutput { y, a }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub pi: Permutation,
    pub x: Vec<f64>,
    /// `max_i |y_π[i] - (A x)[i]|`.
    pub max_abs_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// First solvable permutation in lexicographic order.
    pub witness: Option<Witness>,
    pub permutations_checked: u64,
    /// Permutations on which the least-squares test and the sum criterion disagreed.
    pub criterion_disagreements: u64,
}

/// Whether the first `d` entries of `y_π` sum to the remaining `d + 1`.
pub fn balanced_sum_criterion(y: &[i64], pi: &Permutation, d: usize) -> bool {
    let permuted = pi.apply(y);
    let head: i64 = permuted[..d].iter().sum();
    let tail: i64 = permuted[d..].iter().sum();
    head == tail
}

/// Decides solvability of `y_π = A x` by enumerating every `π` and solving
/// the least-squares problem, cross-checking each verdict against
/// [`balanced_sum_criterion`].
pub fn feasibility_check(out: &ReductionOutput, max_d: usize) -> Result<Feasibility> {
    let d = out.d();
    if d > max_d {
        return Err(Error::Refused(format!(
            "d = {d} means enumerating {}! permutations; limit is d <= {max_d}",
            2 * d + 1
        )));
    }
    let n = 2 * d + 1;
    if out.y.len() != n || out.a.len() != n {
        return Err(Error::invalid("reduction output does not have 2d+1 rows"));
    }
    let design = out.design();
    let kernel = ProjectionKernel::new(&design)?;
    let y = out.y_f64();

    let mut map: Vec<usize> = (0..n).collect();
    let mut witness = None;
    let mut checked = 0u64;
    let mut disagreements = 0u64;
    loop {
        let pi = Permutation::new(map.clone())?;
        let permuted = pi.apply(&y);
        let (x, residual) = kernel.fit(&permuted);
        let solvable = residual.sqrt() < RESIDUAL_TOLERANCE;
        if solvable != balanced_sum_criterion(&out.y, &pi, d) {
            disagreements += 1;
        }
        if solvable && witness.is_none() {
            let fitted = &design * nalgebra::DVector::from_column_slice(&x);
            let max_abs_residual = permuted
                .iter()
                .zip(fitted.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            witness = Some(Witness {
                pi,
                x,
                max_abs_residual,
            });
        }
        checked += 1;
        if !next_permutation(&mut map) {
            break;
        }
    }
    Ok(Feasibility {
        feasible: witness.is_some(),
        witness,
        permutations_checked: checked,
        criterion_disagreements: disagreements,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionDecision {
    pub exists: bool,
    /// Zero-based indices of one half, when a split exists.
    pub subset: Option<Vec<usize>>,
}

/// Exhaustive search over all `2^d` subsets.
pub fn partition_brute_force(inst: &PartitionInstance) -> Result<PartitionDecision> {
    let d = inst.d();
    if d > MAX_SUBSET_D {
        return Err(Error::Refused(format!(
            "subset enumeration over 2^{d} subsets; limit is d <= {MAX_SUBSET_D}"
        )));
    }
    let total: u64 = inst.b.iter().sum();
    if total % 2 == 1 {
        return Ok(PartitionDecision {
            exists: false,
            subset: None,
        });
    }
    for mask in 0u32..(1u32 << d) {
        let sum: u64 = (0..d).filter(|&i| mask >> i & 1 == 1).map(|i| inst.b[i]).sum();
        if 2 * sum == total {
            return Ok(PartitionDecision {
                exists: true,
                subset: Some((0..d).filter(|&i| mask >> i & 1 == 1).collect()),
            });
        }
    }
    Ok(PartitionDecision {
        exists: false,
        subset: None,
    })
}
