//! Orthogonal-complement projection residuals `||P⊥ y||²` computed from a
//! Householder QR factorization (the normal equations are never formed).

use nalgebra::{DMatrix, DVector, Dyn, QR};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Singular values below `RANK_TOLERANCE * largest` count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A factorized design, reusable across many right-hand sides.
pub struct ProjectionKernel {
    qr: QR<f64, Dyn, Dyn>,
    r: DMatrix<f64>,
    nrows: usize,
    ncols: usize,
}

impl ProjectionKernel {
    pub fn new(design: &DMatrix<f64>) -> Result<Self> {
        let (nrows, ncols) = design.shape();
        if ncols == 0 {
            return Err(Error::invalid("design has no columns"));
        }
        if ncols > nrows {
            return Err(Error::DegenerateDesign(format!(
                "{nrows}x{ncols} design cannot have full column rank"
            )));
        }
        let qr = design.clone().qr();
        let r = qr.r();
        let sv = r.singular_values();
        let largest = sv.max();
        let smallest = sv.min();
        if !(largest > 0.0) || smallest <= RANK_TOLERANCE * largest {
            return Err(Error::DegenerateDesign(format!(
                "numerical rank below {ncols} (singular values in [{smallest:e}, {largest:e}])"
            )));
        }
        Ok(ProjectionKernel { qr, r, nrows, ncols })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn rotated(&self, y: &[f64]) -> DVector<f64> {
        assert_eq!(y.len(), self.nrows, "observation length does not match design rows");
        let mut qty = DVector::from_column_slice(y);
        self.qr.q_tr_mul(&mut qty);
        qty
    }

    /// `||P⊥ y||²`: the squared norm of the trailing `n - d` entries of `Qᵀ y`.
    pub fn residual(&self, y: &[f64]) -> f64 {
        let qty = self.rotated(y);
        qty.rows(self.ncols, self.nrows - self.ncols).norm_squared()
    }

    /// Least-squares coefficients and residual for `min_x ||y - M x||²`.
    pub fn fit(&self, y: &[f64]) -> (Vec<f64>, f64) {
        let qty = self.rotated(y);
        let head = qty.rows(0, self.ncols).into_owned();
        let x = self
            .r
            .solve_upper_triangular(&head)
            .expect("R is nonsingular after the rank check");
        let residual = qty.rows(self.ncols, self.nrows - self.ncols).norm_squared();
        (x.as_slice().to_vec(), residual)
    }
}

/// `||P⊥_{ΠA} y||²`, equal to `min_x ||y - Π A x||²`.
pub fn projection_residual(y: &[f64], design: &DMatrix<f64>, p: &Permutation) -> Result<f64> {
    check_shapes(y, design, p)?;
    Ok(ProjectionKernel::new(&p.permute_rows(design))?.residual(y))
}

/// Least-squares fit of `y` against `Π A`; returns `(x_hat, residual)`.
pub fn least_squares(y: &[f64], design: &DMatrix<f64>, p: &Permutation) -> Result<(Vec<f64>, f64)> {
    check_shapes(y, design, p)?;
    Ok(ProjectionKernel::new(&p.permute_rows(design))?.fit(y))
}

pub(crate) fn check_shapes(y: &[f64], design: &DMatrix<f64>, p: &Permutation) -> Result<()> {
    if y.len() != design.nrows() || p.len() != design.nrows() {
        return Err(Error::invalid(format!(
            "shape mismatch: y has {} entries, design has {} rows, permutation has size {}",
            y.len(),
            design.nrows(),
            p.len()
        )));
    }
    Ok(())
}
