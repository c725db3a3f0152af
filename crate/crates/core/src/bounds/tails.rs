use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chernoff lower-tail bound for a chi-square variable with `ell` degrees
/// of freedom: `P(Z <= p) <= (p/ℓ · exp(1 - p/ℓ))^(ℓ/2)` for `p ∈ [0, ℓ]`.
pub fn chi2_lower_tail_bound(ell: usize, p: f64) -> Result<f64> {
    if ell == 0 {
        return Err(Error::invalid("chi-square needs at least one degree of freedom"));
    }
    let l = ell as f64;
    if !(0.0..=l).contains(&p) {
        return Err(Error::OutOfValidity(format!("lower-tail bound holds for p in [0, {ell}], got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let r = p / l;
    Ok((-0.5 * l * (-r.ln() + r - 1.0)).exp())
}

/// Tail bound for the squared norm of a fixed vector projected onto a
/// uniformly random `d`-dimensional subspace of `R^n`:
/// `P(||P x||² >= β d/n ||x||²) <= β^(d/2) (1 + (1-β) d/(n-d))^((n-d)/2)`.
///
/// For `β >= n/d` the event is empty and the bound is reported as 0.
pub fn projection_tail_bound(n: usize, d: usize, beta: f64) -> Result<f64> {
    if d == 0 || d >= n {
        return Err(Error::invalid(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    if !(beta > 1.0) {
        return Err(Error::OutOfValidity(format!("projection bound needs beta > 1, got {beta}")));
    }
    let (nf, df) = (n as f64, d as f64);
    let base = 1.0 + (1.0 - beta) * df / (nf - df);
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok((0.5 * df * beta.ln() + 0.5 * (nf - df) * base.ln()).exp())
}

/// Off-diagonal entry of the normalized covariance `Ȳ`: `(n-h̄)/n + h̄/n²`.
fn off_diagonal(n: usize, hbar: usize) -> f64 {
    let (n, h) = (n as f64, hbar as f64);
    (n - h) / n + h / (n * n)
}

/// The normalized covariance `Ȳ`: unit diagonal, constant off-diagonal.
pub fn covariance_matrix(n: usize, hbar: usize) -> DMatrix<f64> {
    let g = off_diagonal(n, hbar);
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { g })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma7Eigs {
    /// Eigenvalue on the all-ones vector: `1 + (n-1) γ`.
    pub lambda1: f64,
    /// Eigenvalue on the complement of the all-ones vector, multiplicity `n - 1`: `1 - γ`.
    pub lambda_rest: f64,
    /// `det Ȳ = λ1 · λ_rest^(n-1)`.
    pub det_normalized: f64,
    /// `(1 + n)(h̄/n)^(n-1)`, an upper bound on `det Ȳ`.
    pub det_bound_normalized: f64,
    /// `(σ² + ||x*||²)^n (1 + n)(h̄/n)^(n-1)`, the bound on `det E[y yᵀ]`.
    pub det_bound: f64,
}

pub fn lemma7_covariance_eigs(n: usize, snr_plus: f64, hbar: usize) -> Result<Lemma7Eigs> {
    if hbar < 2 || hbar > n {
        return Err(Error::invalid(format!("need 2 <= hbar <= n, got hbar={hbar}, n={n}")));
    }
    if !(snr_plus > 0.0) {
        return Err(Error::invalid(format!("sigma² + ||x*||² must be positive, got {snr_plus}")));
    }
    let (nf, h) = (n as f64, hbar as f64);
    let lambda1 = 1.0 + (nf - h) * (nf - 1.0) / nf + h * (nf - 1.0) / (nf * nf);
    let lambda_rest = h / nf - h / (nf * nf);
    let det_bound_normalized = (1.0 + nf) * (h / nf).powi(n as i32 - 1);
    Ok(Lemma7Eigs {
        lambda1,
        lambda_rest,
        det_normalized: lambda1 * lambda_rest.powi(n as i32 - 1),
        det_bound_normalized,
        det_bound: snr_plus.powi(n as i32) * det_bound_normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_lower_tail_bound(4, 4.0).unwrap(), 1.0);
        assert_eq!(chi2_lower_tail_bound(4, 0.0).unwrap(), 0.0);
        // (0.1 e^0.9)^1
        let expected = 0.1 * 0.9f64.exp();
        assert!((chi2_lower_tail_bound(2, 0.2).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.2460).abs() < 1e-4);
        // (0.5 e^0.5)^0.5
        assert!((chi2_lower_tail_bound(1, 0.5).unwrap() - 0.908).abs() < 1e-3);
        assert!(matches!(chi2_lower_tail_bound(2, 2.5), Err(Error::OutOfValidity(_))));
        assert!(chi2_lower_tail_bound(2, -0.1).is_err());
    }

    #[test]
    fn chi2_bound_is_nondecreasing() {
        for ell in [1usize, 2, 5, 10, 50] {
            let mut prev = 0.0;
            for k in 0..=400 {
                let v = chi2_lower_tail_bound(ell, ell as f64 * k as f64 / 400.0).unwrap();
                assert!(v >= prev && v <= 1.0);
                prev = v;
            }
        }
    }

    #[test]
    fn projection_examples() {
        let v = projection_tail_bound(10, 2, 2.0).unwrap();
        assert!((v - 2.0 * 0.75f64.powi(4)).abs() < 1e-14);
        assert!((v - 0.6328).abs() < 1e-4);
        assert!((projection_tail_bound(10, 2, 1.0 + 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(projection_tail_bound(10, 2, 5.0).unwrap(), 0.0);
        assert_eq!(projection_tail_bound(10, 2, 7.0).unwrap(), 0.0);
        assert!(matches!(projection_tail_bound(10, 2, 1.0), Err(Error::OutOfValidity(_))));
    }

    #[test]
    fn lemma7_formulas() {
        let e = lemma7_covariance_eigs(5, 1.0, 2).unwrap();
        assert!((e.lambda1 - (1.0 + 4.0 * (0.6 + 0.08))).abs() < 1e-15);
        assert!((e.lambda_rest - (0.4 - 0.08)).abs() < 1e-15);
        assert!(e.det_normalized <= e.det_bound_normalized);
        let scaled = lemma7_covariance_eigs(5, 3.0, 2).unwrap();
        assert!((scaled.det_bound - 243.0 * e.det_bound_normalized).abs() < 1e-9);
        assert!(lemma7_covariance_eigs(5, 1.0, 1).is_err());
        assert!(lemma7_covariance_eigs(5, 1.0, 6).is_err());
    }

    #[test]
    fn lemma7_full_radius() {
        // h̄ = n: off-diagonal 1/n, so λ_rest = 1 - 1/n and λ1 = 1 + (n-1)/n.
        let e = lemma7_covariance_eigs(6, 1.0, 6).unwrap();
        assert!((e.lambda_rest - 5.0 / 6.0).abs() < 1e-15);
        assert!((e.lambda1 - (1.0 + 5.0 / 6.0)).abs() < 1e-15);
        let eig = covariance_matrix(6, 6).symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        assert!((vals[5] - e.lambda1).abs() < 1e-12);
        assert!(vals[..5].iter().all(|v| (v - e.lambda_rest).abs() < 1e-12));
    }
}
